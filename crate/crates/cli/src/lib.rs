//! Library side of the `gpj` command-line tool.

pub mod config;
pub mod run;
pub mod sweep;

use thiserror::Error;

/// Exit status for an invalid configuration or unwritable output.
pub const EXIT_INVALID_CONFIG: i32 = 3;
/// Exit status for a numerical failure.
pub const EXIT_NUMERICAL_FAILURE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_INVALID_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL_FAILURE,
        }
    }
}

/// Input-validation errors from the core map to exit 3, everything else to 4.
pub fn core_err(e: gpj_core::Error) -> CliError {
    use gpj_core::Error as E;
    match e {
        E::InvalidProfile(_) | E::InvalidArgument(_) | E::OutOfDomain { .. } | E::UndefinedAlpha => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Numerical(e.to_string()),
    }
}
