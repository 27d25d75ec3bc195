use thiserror::Error;

/// Errors produced by the library.
///
/// `Parse` is kept separate from the domain variants so front ends can map
/// malformed input and mathematically invalid input to different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("term budget exhausted after {terms} terms (best value {best:e}, remaining bound {bound:e})")]
    Budget { terms: usize, best: f64, bound: f64 },

    #[error("insufficient zeros: stream is only known up to {known} but {needed} was requested")]
    InsufficientZeros { known: String, needed: String },

    #[error("pole of the gamma function at {0}")]
    Pole(String),
}

impl Error {
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
