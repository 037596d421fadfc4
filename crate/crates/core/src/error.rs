use thiserror::Error;

/// Errors raised by the reservoir computing library.
#[derive(Debug, Error)]
pub enum RcnError {
    #[error("{context}: expected width {expected}, found {found}")]
    WidthMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("{context}: shape mismatch ({detail})")]
    Shape { context: String, detail: String },

    #[error("{0}: input contains non-finite values")]
    NonFinite(String),

    #[error("{0}: empty data")]
    Empty(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("estimator is not fitted")]
    NotFitted,

    #[error("label {0} was not seen during fitting")]
    UnknownLabel(i64),

    #[error("singular system: {0}; use a regularization parameter alpha > 0")]
    Singular(String),

    #[error("spectral radius did not converge within {iterations} iterations (best estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("reservoir initialization failed: {0}")]
    Initialization(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front-ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

impl RcnError {
    pub fn class(&self) -> ErrorClass {
        match self {
            RcnError::InvalidParameter { .. } | RcnError::UnknownParameter(_) => ErrorClass::Usage,
            RcnError::Singular(_)
            | RcnError::NoConvergence { .. }
            | RcnError::Initialization(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub fn width(context: impl Into<String>, expected: usize, found: usize) -> Self {
        RcnError::WidthMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    pub fn shape(context: impl Into<String>, detail: impl Into<String>) -> Self {
        RcnError::Shape {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        RcnError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, RcnError>;
