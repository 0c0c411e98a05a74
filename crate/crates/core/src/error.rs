use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("basis is empty: {0}")]
    EmptyBasis(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("no mode labelled `{0}` in basis")]
    UnknownMode(String),

    #[error("operands live on different bases")]
    IncompatibleBasis,

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("condition {condition} violated: {detail}")]
    ConditionViolation { condition: &'static str, detail: String },

    #[error("degenerate coupling: collective rate is zero")]
    DegenerateCoupling,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("step size underflow at t = {t:.6e} s (h = {h:.3e} s, {steps} accepted steps)")]
    Stiffness { t: f64, h: f64, steps: usize },

    #[error("integration did not converge: {0}")]
    Convergence(String),

    #[error("{check}: distance {distance:.3e} exceeds {limit:.1e}")]
    Equivalence { check: String, distance: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
