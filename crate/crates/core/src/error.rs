use thiserror::Error;

/// Errors raised by the numerical modules and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A domain type failed one of its invariants at construction.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A closed-form expression hit a singular point.
    #[error("{module}::{operation}: singular at {input}")]
    Singular {
        module: &'static str,
        operation: &'static str,
        input: String,
    },

    /// A numerical procedure could not deliver a trustworthy result.
    #[error("{module}::{operation}: {detail}")]
    Numerical {
        module: &'static str,
        operation: &'static str,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) | Error::Invariant(_) | Error::Json(_) => {
                ErrorClass::Validation
            }
            Error::Singular { .. } | Error::Numerical { .. } => ErrorClass::Numerical,
            Error::Io(_) | Error::Csv(_) => ErrorClass::Io,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn numerical(
        module: &'static str,
        operation: &'static str,
        detail: impl Into<String>,
    ) -> Self {
        Error::Numerical {
            module,
            operation,
            detail: detail.into(),
        }
    }

    pub(crate) fn singular(
        module: &'static str,
        operation: &'static str,
        input: impl Into<String>,
    ) -> Self {
        Error::Singular {
            module,
            operation,
            input: input.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
