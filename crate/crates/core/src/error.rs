use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a supported prime")]
    NotPrime(u64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degree {degree} lies outside the valid window [{lo}, {hi}]")]
    OutsideWindow { degree: i64, lo: i64, hi: i64 },
    #[error("invalid window: {0}")]
    Window(String),
    #[error("unbounded enumeration: {0}")]
    Unbounded(String),
    #[error("inhomogeneous element: {0}")]
    Inhomogeneous(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
