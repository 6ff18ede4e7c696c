use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A closed-form claim did not hold numerically. Never patched over.
    #[error("theory violation: {0}")]
    TheoryViolation(String),

    #[error("no bracketing interval found below n = {ceiling}")]
    NoBracket { ceiling: f64 },

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("attack input has no {0}")]
    MissingClass(&'static str),

    #[error("line {line}: {reason}")]
    Trace { line: usize, reason: String },

    #[error("duplicate example_id `{0}`")]
    DuplicateId(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
