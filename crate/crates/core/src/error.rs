//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Difference quotients of a supposedly convex oracle increased along a
    /// shrinking step schedule. Signals a bad oracle, not a numerics issue.
    #[error("convexity violation: difference quotients increased by {worst:.3e}")]
    ConvexityViolation { worst: f64 },

    #[error("smoothing inner minimization failed to converge (residual {residual:.3e})")]
    SmoothingFailure { residual: f64 },

    /// The subgradient selection did not settle along a directional
    /// approach. On valid convex input this should never fire.
    #[error("directional subgradient limit did not settle (oscillation {oscillation:.3e})")]
    LimitFailure { oscillation: f64 },

    #[error("unsupported dimension {got} ({context})")]
    UnsupportedDimension { got: usize, context: &'static str },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("unknown recipe: {0}")]
    UnknownRecipe(String),
}

pub type Result<T> = std::result::Result<T, Error>;
