use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// `index` is 1-based, matching the position of the item in the input list.
    #[error("item {index} is linearly dependent on the preceding items (pivot {pivot:e} <= tolerance {tolerance:e})")]
    LinearDependence {
        index: usize,
        pivot: f64,
        tolerance: f64,
    },

    #[error("unsupported size: {size} exceeds the maximum of {max}")]
    UnsupportedSize { size: usize, max: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("item index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
