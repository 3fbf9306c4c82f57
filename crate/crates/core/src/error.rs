use thiserror::Error;

use crate::fermat::SolveResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("objective gradient is undefined at focus {index}")]
    EvaluationAtFocus { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Box<SolveResult>,
    },

    #[error("level {s} is below the minimum {s0}; no curve exists")]
    LevelBelowMinimum { s: f64, s0: f64 },

    #[error("level {s} equals the minimum {s0}; the curve degenerates to a point")]
    LevelDegenerate { s: f64, s0: f64 },

    #[error("sublevel set {{f <= {s}}} is not contained in the box (f = {boundary_value} on the boundary)")]
    RegionNotContained { s: f64, boundary_value: f64 },

    #[error("point ({x}, {y}) is outside the calibrated map")]
    OutOfBounds { x: f64, y: f64 },

    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }
}
