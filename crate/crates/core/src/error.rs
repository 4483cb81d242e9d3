use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("gram matrix is singular even with jitter {max_jitter:e} (duplicate or orbit-equivalent inputs?)")]
    SingularGram { max_jitter: f64 },

    #[error("index {index} out of range for group of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("integrand returned non-finite value {value} at {point:?}")]
    NonFiniteIntegrand { point: Vec<f64>, value: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
