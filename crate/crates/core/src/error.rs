use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty point set")]
    EmptySet,
    #[error("point {index}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {index}: non-finite coordinate")]
    NonFinite { index: usize },
    #[error("point {index} duplicates point {first}")]
    Duplicate { index: usize, first: usize },
    #[error("spread is undefined for fewer than two points")]
    UndefinedSpread,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("tree format: {0}")]
    Format(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
