use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum CqecError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("bound undefined: {0}")]
    UndefinedBound(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CqecError>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> CqecError {
    CqecError::InvalidArgument(msg.into())
}
