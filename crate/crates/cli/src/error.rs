use std::path::{Path, PathBuf};

use thiserror::Error;
use xplain_rl::CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    ConfigLine { path: PathBuf, line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("data mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigLine { .. } | CliError::Config(_) => 2,
            CliError::Core(
                CoreError::InvalidConfig { .. }
                | CoreError::UnknownName(_)
                | CoreError::InvalidState { .. }
                | CoreError::InvalidAction { .. },
            ) => 2,
            CliError::Io { .. } => 3,
            CliError::Format { .. } | CliError::Mismatch(_) | CliError::Core(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, message: impl ToString) -> Self {
        CliError::Format { path: path.to_path_buf(), message: message.to_string() }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
