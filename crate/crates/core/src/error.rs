use thiserror::Error;

/// Errors raised by the geometry and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The operation is not available for this input (e.g. a body without
    /// the required symmetry, or a grid in too high a dimension).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical procedure ran but its own diagnostics reject the result.
    #[error("diagnostics: {0}")]
    Diagnostics(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn diagnostics(msg: impl Into<String>) -> Self {
        Error::Diagnostics(msg.into())
    }

    /// Short machine-readable tag used in reports and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Unsupported(_) => "unsupported",
            Error::Diagnostics(_) => "diagnostics",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
