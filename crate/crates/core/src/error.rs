use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("vectors are linearly dependent")]
    Dependent,
    #[error("unknown weight {0:?}")]
    UnknownWeight(Vec<i64>),
    #[error("no convergent with denominator <= {max_den} approximates {value}")]
    NoConvergent { value: f64, max_den: u64 },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("tensor is not concise in factor {0}")]
    NotConcise(char),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }
}
