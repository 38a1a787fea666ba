use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the learning pipeline.
#[derive(Debug, Error)]
pub enum FeslError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    State(String),

    #[error("singular system: {0}; use a ridge penalty > 0")]
    Singular(String),

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("round {round}: {source}")]
    AtRound {
        round: usize,
        #[source]
        source: Box<FeslError>,
    },
}

impl FeslError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        FeslError::InvalidInput(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        FeslError::State(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        FeslError::Format {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FeslError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_round(self, round: usize) -> Self {
        match self {
            e @ FeslError::AtRound { .. } => e,
            e => FeslError::AtRound {
                round,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by malformed user input (CLI exit code 2).
    pub fn is_input_error(&self) -> bool {
        match self {
            FeslError::AtRound { source, .. } => source.is_input_error(),
            FeslError::InvalidInput(_)
            | FeslError::DimensionMismatch { .. }
            | FeslError::Format { .. }
            | FeslError::Io { .. } => true,
            FeslError::State(_) | FeslError::Singular(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, FeslError>;
