use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cube with origin {origin:?} and side {side} is not aligned with the sampling grid")]
    Alignment { origin: Vec<f64>, side: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("weight must be strictly positive, found {value} at cell {cell}")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("negative sample {value} at cell {cell}")]
    NegativeSample { cell: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("reverse Hölder search failed: {0}")]
    SearchFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
