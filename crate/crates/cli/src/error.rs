use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: non-finite values at iteration {iteration}")]
    Numeric { iteration: usize },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.into(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<sarseg_core::Error> for CliError {
    fn from(err: sarseg_core::Error) -> Self {
        match err {
            sarseg_core::Error::InvalidInput(m) => CliError::Usage(m),
            sarseg_core::Error::Config(m) => CliError::Config(m),
            sarseg_core::Error::NumericFailure { iteration } => CliError::Numeric { iteration },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
