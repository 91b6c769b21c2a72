use thiserror::Error;

use crate::specfun::QuadratureResult;

/// Errors raised by the reconstruction library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {:e}, estimated error {:e} after {} evaluations", .best.value, .best.abs_error_estimate, .best.evaluations)]
    Convergence { best: QuadratureResult },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("operation not supported for {0} windows")]
    UnsupportedWindow(&'static str),

    #[error("evaluation point {x} is within {tol:e} of the pole at {pole}")]
    Singularity { x: f64, pole: i64, tol: f64 },

    #[error("degenerate node set: {0}")]
    DegenerateNodes(String),

    #[error("degenerate periodic offsets: {0}")]
    DegenerateOffsets(String),

    #[error("node generation failed after {attempts} rejected draws")]
    GenerationFailure { attempts: usize },

    #[error("outside the theorem hypotheses: {0}")]
    OutOfTheory(String),

    #[error("plan and samples are inconsistent: {0}")]
    Consistency(String),

    #[error("need at least {needed} cells above the floor, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by numerically degenerate inputs rather than
    /// malformed configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::Singularity { .. }
                | Error::DegenerateNodes(_)
                | Error::DegenerateOffsets(_)
                | Error::GenerationFailure { .. }
        )
    }
}
