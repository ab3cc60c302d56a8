//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// Validation failures (bad arguments, unsupported combinations) are kept
/// distinct from numerical failures (non-convergence, singular systems) so
/// callers can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or unsupported input combination.
    #[error("validation: {0}")]
    Validation(String),

    /// Argument magnitude would overflow the working precision.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A zero of the target function lies on (or hugs) a contour edge.
    #[error("zero on contour boundary: {0}")]
    BoundaryZero(String),

    /// Contour quadrature failed to settle on an integer winding number.
    #[error("winding quadrature did not converge: {0}")]
    WindingNonConvergence(String),

    /// An iterative numerical procedure failed to converge.
    #[error("non-convergence: {0}")]
    NonConvergence(String),

    /// A linear system was singular or numerically unusable.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// Adaptive ODE integration could not meet its tolerance.
    #[error("ode step-size failure: {0}")]
    OdeStepFailure(String),

    /// Requested resolution is insufficient for the requested regime.
    #[error("resolution insufficient: {0}")]
    ResolutionInsufficient(String),

    /// No admissible direction satisfies the requested margin.
    #[error("no admissible ray: {0}")]
    NoAdmissibleRay(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True when the error indicates bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_))
    }
}
