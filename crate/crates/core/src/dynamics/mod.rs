//! Master-equation and Schrödinger integration with fidelity and photon
//! diagnostics.
//!
//! Runs happen in the interaction picture; the dissipators are used
//! unrotated.

mod evolve;
pub mod integrator;
mod lindblad;
mod observables;

pub use evolve::{
    evolve_closed, evolve_lindblad, fidelity, EvolveOptions, ObservableTrace, Probes, RunMetadata, RunStats, SimResult,
};
pub use lindblad::{build_lindblad_spec, Channel, ChannelForm, LindbladSpec};
pub use observables::{photon_observables, photon_operators, photon_summary, time_average, PhotonObservables};
