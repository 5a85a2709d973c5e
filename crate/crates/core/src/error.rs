use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("field is not Hermitian: imaginary residue {residue:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { residue: f64, tolerance: f64 },

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("direct collision sum too large: {pairs} mode pairs exceed the limit of {limit}")]
    TooLarge { pairs: u128, limit: u128 },

    #[error("non-finite coefficients after step ending at t = {time}")]
    BlowUp { time: f64 },
}

pub type Result<T> = std::result::Result<T, SpectralError>;
