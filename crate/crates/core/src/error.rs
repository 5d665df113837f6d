use thiserror::Error;

use crate::transport::TransportError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decoding failed: {0}")]
    Decode(String),

    #[error("share belongs to party {got}, expected party {expected}")]
    PartyMismatch { expected: usize, got: usize },

    #[error("MAC check failed; protocol aborted")]
    MacCheckFailed,

    #[error("preprocessing exhausted: no {0} left")]
    PreprocessingExhausted(&'static str),

    #[error("assignment does not satisfy the constraint system")]
    Unsatisfied,

    #[error("circuit references out-of-range wire: {0}")]
    WireOutOfRange(String),

    #[error("provers diverged: {0}")]
    Divergence(String),

    #[error(transparent)]
    Transport(#[from] TransportError),
}

impl Error {
    /// True for failures that abort a multi-party run (as opposed to local misuse).
    pub fn is_protocol_abort(&self) -> bool {
        matches!(
            self,
            Error::MacCheckFailed | Error::Transport(_) | Error::Divergence(_)
        )
    }
}
