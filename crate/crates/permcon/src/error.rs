use thiserror::Error;

/// Errors produced by construction, evaluation and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A bound was requested without its theorem hypothesis holding
    /// (e.g. the zero-sum flag for the Hoeffding Bennett bound).
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    /// An exact-enumeration routine was asked for an instance above its
    /// hard size cap.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Malformed serialized input (family/matrix/report JSON).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
