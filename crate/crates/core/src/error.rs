use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter left its valid domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A round index or similar fell outside its range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    /// Malformed argument (NaN, empty grid, zero trials, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// Analytic and oracle values disagree beyond tolerance.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
