use serde::Serialize;
use thiserror::Error;

use cavityw_core::Error as CoreError;

#[derive(Debug, Clone, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Numeric(String),

    #[error("{0}")]
    Threshold(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Threshold(_) => "threshold",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Threshold(_) => 4,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport { class: self.class(), exit_code: self.exit_code(), message: self.to_string() }
    }
}

/// Machine-readable form written to stderr and the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub class: &'static str,
    pub exit_code: u8,
    pub message: String,
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Stiffness { .. } | CoreError::Convergence(_) | CoreError::InvalidState(_) => {
                CliError::Numeric(e.to_string())
            }
            CoreError::Equivalence { .. } => CliError::Threshold(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let code = |e: CoreError| CliError::from(e).exit_code();
        assert_eq!(code(CoreError::Config("x".into())), 2);
        assert_eq!(code(CoreError::InvalidRegime("x".into())), 2);
        assert_eq!(code(CoreError::Stiffness { t: 0.0, h: 0.0, steps: 0 }), 3);
        assert_eq!(code(CoreError::Convergence("x".into())), 3);
        assert_eq!(code(CoreError::Equivalence { check: "x".into(), distance: 1.0, limit: 0.0 }), 4);
        let r = CliError::Numeric("drift".into()).report();
        assert_eq!((r.class, r.exit_code), ("numeric", 3));
    }
}
