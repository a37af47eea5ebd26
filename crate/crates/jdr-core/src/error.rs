use thiserror::Error;

/// Errors produced by the receiver simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("iteration did not converge after {iters} steps (last residual {residual:.3e})")]
    Convergence { iters: usize, residual: f64 },

    #[error("Fock truncation too small: {0}")]
    Truncation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
