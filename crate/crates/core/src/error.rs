use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("not a standard tableau: {0}")]
    NonStandard(String),

    #[error("parameters hit a pole: {0}")]
    Pole(String),

    #[error("operator image leaves the basis: {0}")]
    LeavesBasis(String),

    #[error("family does not commute: {0}")]
    NonCommuting(String),

    #[error("eigenvector continuation failed: {0}")]
    Continuation(String),

    #[error("numerically inconclusive: {reason} (suggested tolerance {suggested_tol:e})")]
    Inconclusive { reason: String, suggested_tol: f64 },

    #[error("ambiguous Gelfand-Tsetlin decoding: {0}")]
    DecoderAmbiguity(String),

    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    /// Failures of the numerical continuation rather than of the input or
    /// of an exact identity.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Continuation(_) | Error::Inconclusive { .. } | Error::DecoderAmbiguity(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
