use thiserror::Error;

/// Errors produced by spectrum construction, correlation evaluation and the
/// information-theoretic operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Pointwise density evaluation was requested on a delta-supported
    /// spectrum (2D-isotropic or discrete). Such spectra are represented
    /// symbolically and have no finite density per steradian.
    #[error("singular support: density is delta-supported and has no pointwise value")]
    SingularSupport,

    /// Dyadic refinement hit the node budget before two successive
    /// refinements agreed to the requested tolerance.
    #[error("quadrature did not converge within the node budget (last refinement delta {error_estimate:.3e})")]
    QuadratureNotConverged { error_estimate: f64 },

    /// A determinant or sample covariance left the numerically meaningful
    /// range (non-real Hermitian determinant, singular covariance, ...).
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::NumericalDegeneracy(msg.into())
    }
}
