//! Hilbert-space bookkeeping and sparse operator algebra.

pub mod basis;
pub mod local;
pub mod operator;
pub mod state;

pub use basis::{CompositeBasis, ModeKind, ModeSpec};
pub use operator::{SparseOperator, C64};
pub use state::{DensityMatrix, StateVector};
