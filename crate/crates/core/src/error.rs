use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(
        "eigensolver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    Convergence { iterations: usize, residual: f64 },
    #[error("norm mismatch: |x0| = {expected}, |x_hat| = {actual}")]
    NormMismatch { expected: f64, actual: f64 },
}

impl Error {
    /// Short machine-readable tag, used for failed-trial rows.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Contract(_) => "contract",
            Error::Convergence { .. } => "convergence",
            Error::NormMismatch { .. } => "norm_mismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
