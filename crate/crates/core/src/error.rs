use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {z} lies outside the region where {what} is defined")]
    Domain { z: Complex64, what: &'static str },

    #[error("step size underflow at z = {z} (h = {h:e}); tolerance unreachable at working precision")]
    StepUnderflow { z: Complex64, h: f64 },

    #[error("integration exceeded {max_steps} steps before reaching {z}")]
    TooManySteps { z: Complex64, max_steps: usize },

    #[error("non-finite solution value at z = {z}")]
    NonFinite { z: Complex64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("zero of the function on the contour near {near} (after {nudges} nudges)")]
    BoundaryZero { near: Complex64, nudges: usize },

    #[error("contour refinement did not converge: {0}")]
    NonConvergent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
