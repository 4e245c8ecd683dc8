use std::path::Path;

use nsopt_core::Error;
use thiserror::Error;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    AuditFailed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::AuditFailed(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
            CliError::Diverged(_) => 4,
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteIterate { .. } | Error::NonFinite(_) => CliError::Diverged(e.to_string()),
            Error::AuditFailure { .. } => CliError::AuditFailed(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
