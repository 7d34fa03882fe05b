use std::fmt;

use flatbeam_core::Error as CoreError;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad input: unknown keys, unparsable values, parameters outside a domain.
    Validation(String),
    /// The requested construction does not exist for these parameters.
    Infeasible(String),
    /// An iteration or integration failed to converge or lost ordering.
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let m = e.to_string();
        match e {
            CoreError::Domain { .. }
            | CoreError::RegimeMismatch { .. }
            | CoreError::ShiftRange { .. }
            | CoreError::StepTooLarge { .. } => CliError::Validation(m),
            CoreError::Infeasible { detail } => CliError::Infeasible(detail),
            CoreError::Bracket { .. }
            | CoreError::Quadrature { .. }
            | CoreError::Integration { .. }
            | CoreError::NonConvergence { .. }
            | CoreError::Ordering { .. } => CliError::Numeric(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
