use thiserror::Error;

/// Errors returned by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidArray(String),
    #[error("index ({0}, {1}) out of range for a {2}x{3} array")]
    IndexOutOfRange(usize, usize, usize, usize),
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("channel needs at least one path")]
    EmptyPaths,
    #[error("degenerate scenario prior: {0}")]
    DegeneratePrior(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty 6-dB superlevel set")]
    EmptyLobe,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel factorization failed even with jitter {0:e}")]
    Factorization(f64),
    #[error("support set is empty")]
    EmptySupport,
    #[error("zero channel")]
    ZeroChannel,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
