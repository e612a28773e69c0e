use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("malformed run-length string at run {run}: {reason}")]
    MalformedRle { run: usize, reason: String },
    #[error("unknown class label `{0}`")]
    UnknownClass(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("only {found} feature matches survived, at least {required} are needed")]
    InsufficientMatches { found: usize, required: usize },
    #[error("alignment failed: {0}")]
    AlignmentFailed(String),
}

impl Error {
    pub(crate) fn dims(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_width: expected.0,
            expected_height: expected.1,
            width: got.0,
            height: got.1,
        }
    }
}
