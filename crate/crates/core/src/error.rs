use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("point {0} duplicates an earlier point")]
    DuplicatePoint(usize),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("integer range exceeded: {0}")]
    Overflow(String),
    #[error("shear does not map the grid to itself: {0}")]
    NonIntegerShear(String),
    #[error("box too small, need lower corner {lo:?} and upper corner {hi:?}")]
    BoxTooSmall { lo: Vec<f64>, hi: Vec<f64> },
    #[error("strategy {strategy} does not apply: {reason}")]
    Inapplicable { strategy: &'static str, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
