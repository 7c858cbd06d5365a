use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("aliasing: {0}")]
    Aliasing(String),
    #[error("insufficient sampling: {0}")]
    Sampling(String),
    #[error("position {0:?} lies outside the grid")]
    OutOfBounds([f64; 3]),
    #[error("point is not a local extremum of the potential: {0}")]
    NotAnExtremum(String),
    #[error("not a trap: {0}")]
    NotATrap(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
