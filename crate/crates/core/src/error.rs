use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state {0} is not active in raga `{1}`")]
    InvalidState(usize, String),

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("raga config error: {0}")]
    RagaConfig(String),

    #[error("length mismatch: prediction has {pred} items, truth has {truth}")]
    LengthMismatch { pred: usize, truth: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
