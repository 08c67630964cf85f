use thiserror::Error;

/// Errors raised by parameter validation and by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site index {site} out of range for lattice with {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("side length {0} must be divisible by 4 when columns are pinned")]
    PinningNeedsMultipleOfFour(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sweep does not cover the {0} phase")]
    MissingPhase(&'static str),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
