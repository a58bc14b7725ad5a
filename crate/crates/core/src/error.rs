use thiserror::Error;

/// Errors produced by the library.
///
/// `Validation` and `Domain` indicate bad inputs (caught before any real
/// computation starts); the remaining variants are raised by the numerical
/// routines themselves.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor invariant was violated.
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An improper integral fails its convergence condition.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// A truncated series ended with a last term above tolerance.
    #[error("series did not converge: {0}")]
    NonConvergence(String),

    /// A step size or grid is too coarse for the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A scan parameter cannot be resolved on the given grid.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// An expression denominator is within the guard band of zero.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Constrained random sampling failed after bounded retries.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// A matrix is not a valid state/observable for the requested operation.
    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl Error {
    /// True for input errors (validation/domain), false for errors raised
    /// mid-computation. The CLI maps these to exit codes 1 and 2.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
