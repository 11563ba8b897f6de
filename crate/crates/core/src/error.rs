use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("state index {index} out of range (state count {count})")]
    InvalidState { index: usize, count: usize },

    #[error("action index {index} out of range (action count {count})")]
    InvalidAction { index: usize, count: usize },

    #[error("a terminal state cannot be the source of an action")]
    TerminalSource,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid filter parameters: {0}")]
    InvalidFilter(String),

    #[error("absorption system is singular")]
    SingularSystem,

    #[error("unknown name `{0}`")]
    UnknownName(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
