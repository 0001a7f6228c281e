use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed {what} at line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error("invalid {what} file: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("empty input")]
    EmptyInput,

    #[error("cannot segment input: no lexicon entry covers {ch:?} at char offset {offset}")]
    UnsegmentableInput { ch: char, offset: usize },

    #[error("phoneme {0:?} is not in the phoneme inventory")]
    UnknownPhoneme(String),

    #[error("phoneme id {id} out of range for embedding table with {size} rows")]
    UnknownPhonemeId { id: usize, size: usize },

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("missing tensor {0:?}")]
    MissingTensor(String),

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures caused by numeric blow-up rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFiniteLoss { .. })
    }
}
