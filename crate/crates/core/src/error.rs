use thiserror::Error;

/// Errors raised by the estimation pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum HawkesError {
    /// A model or algorithm parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Input data (an event stream, a matrix) violates a structural requirement.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A Gram matrix is not numerically positive definite.
    #[error(
        "degenerate Gram matrix (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e}); \
         use a longer observation horizon or a smaller model order"
    )]
    DegenerateGram { min_eigenvalue: f64, max_eigenvalue: f64 },

    /// The requested simulation would produce more events than the resource guard allows.
    #[error("expected event count {expected:e} exceeds the limit of {limit:e}")]
    TooManyEvents { expected: f64, limit: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HawkesError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = HawkesError> = std::result::Result<T, E>;
