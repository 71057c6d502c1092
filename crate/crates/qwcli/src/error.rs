use thiserror::Error;

/// Failures surfaced by the command layer, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, malformed input, or an error from the numerical core.
    #[error("{0}")]
    Validation(String),
    /// Inputs were fine but an identity or cross-check did not hold.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

impl From<qbessel_core::Error> for CliError {
    fn from(e: qbessel_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
