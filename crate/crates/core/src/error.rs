use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("capacity exceeded: {what} (limit {limit}, requested {requested})")]
    Capacity {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported gate {gate} on {backend} backend")]
    UnsupportedGate {
        gate: String,
        backend: &'static str,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl SimError {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        SimError::Dimension { expected, found }
    }

    pub(crate) fn capacity(what: &'static str, limit: usize, requested: usize) -> Self {
        SimError::Capacity {
            what,
            limit,
            requested,
        }
    }

    /// Whether this is a capacity failure (as opposed to bad input).
    pub fn is_capacity(&self) -> bool {
        matches!(self, SimError::Capacity { .. })
    }
}
