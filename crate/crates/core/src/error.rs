use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not reach the error target: estimate {value:e}, error {error:e}, target {target:e}")]
    QuadratureFailure { value: f64, error: f64, target: f64 },

    #[error("integrability of 1/(1+psi) is indeterminate: {0}")]
    Indeterminate(String),

    #[error("derivative did not stabilise at x = {x}: last estimates {last:e} and {previous:e}")]
    DerivativeUnstable { x: f64, last: f64, previous: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("base matrix is singular")]
    SingularBase,

    #[error("matrix is singular")]
    Singular,

    #[error("I + K diag(s) is singular or has non-positive determinant")]
    SingularShift,

    #[error("nonpositive diagonal entry at index {0}")]
    NonpositiveDiagonal(usize),

    #[error("matrix is not positive semidefinite (jitter ladder exhausted at {jitter:e})")]
    NotPsd { jitter: f64 },

    #[error("kernel is not samplable: {0}")]
    NotSamplable(String),

    #[error("limit is inconclusive: {0}")]
    Inconclusive(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
