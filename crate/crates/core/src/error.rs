use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected a field in {expected} representation, got {found}")]
    WrongRepresentation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("sample count {found} does not match grid size {expected}")]
    SampleCount { expected: usize, found: usize },

    #[error("symbol is not finite at xi = {xi:?}")]
    NonFiniteSymbol { xi: Vec<f64> },

    #[error("grid too coarse: {0}")]
    Aliasing(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("elliptic phase rejected: minimum sampled Hessian eigenvalue {min_eigenvalue} is not positive")]
    NotElliptic { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("problem too large: {0}")]
    Intractable(String),

    #[error("grid for lambda = {lambda} needs {required} samples, above the cap of {cap}")]
    MemoryCap {
        lambda: f64,
        required: usize,
        cap: usize,
    },

    #[error("regression failed: {0}")]
    Fit(String),

    #[error("non-finite value produced: {0}")]
    NonFinite(String),

    #[error("malformed field dump: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
