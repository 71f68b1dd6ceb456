use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("unresolved norm: maximizer on band boundary (lower bound {lower_bound})")]
    UnresolvedNorm { lower_bound: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error("step-size error: {0}")]
    StepSize(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("horizon error: |t| = {t} is not below T = {horizon}")]
    Horizon { t: f64, horizon: f64 },
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("size error: support of {0} points exceeds the exact LP limit")]
    Size(usize),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
