use thiserror::Error;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    EmptyClass(String),
    #[error("{0}")]
    InvalidCurve(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::EmptyClass(_) => 3,
            CliError::InvalidCurve(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

impl From<rcf_core::registry::RegistryError> for CliError {
    fn from(e: rcf_core::registry::RegistryError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<rcf_core::normalization::NormalizationError> for CliError {
    fn from(e: rcf_core::normalization::NormalizationError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
