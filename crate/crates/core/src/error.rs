use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The quantity diverges at this argument (e.g. K(1)).
    #[error("divergence: {0}")]
    Divergence(String),

    /// An iterative method did not converge.
    #[error("no convergence after {iterations} iterations: {what}")]
    Iteration { what: String, iterations: usize },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("integration error: {0}")]
    Integration(String),

    /// The argument is too close to a singular point of the map.
    #[error("singularity: {0}")]
    Singularity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
