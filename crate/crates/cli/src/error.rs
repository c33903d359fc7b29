use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Input { context: String, source: qfloquet::Error },

    #[error("{context}: {source}")]
    Numerical { context: String, source: qfloquet::Error },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("replay differs from the stored report at {0}")]
    ReplayMismatch(String),
}

impl CliError {
    /// Sorts a library error into input or numerical failure.
    pub fn from_core(context: impl Into<String>, source: qfloquet::Error) -> Self {
        let context = context.into();
        if source.is_numerical() {
            CliError::Numerical { context, source }
        } else {
            CliError::Input { context, source }
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical { .. } | CliError::ReplayMismatch(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
