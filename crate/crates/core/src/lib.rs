//! Coherent transfer of W states between two groups of cavities linked by a
//! single coupler qutrit.
//!
//! The crate builds the composite Hilbert space of `2n` qutrits, `2n`
//! cavities and the coupler ([`quantum`], [`layout`]), derives device
//! parameters satisfying the matching conditions ([`device`]), assembles the
//! interaction-picture and effective Hamiltonians ([`hamiltonians`]), provides
//! the closed-form ideal evolution ([`analytic`]), integrates the master
//! equation ([`dynamics`]) and runs parameter sweeps ([`experiments`]).

pub mod analytic;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod layout;
pub mod quantum;
pub mod units;

pub use error::{Error, Result};
