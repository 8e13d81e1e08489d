use alloc::string::String;

use crate::datamodel::Modality;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid label id {0}")]
    InvalidLabel(i64),

    #[error("invalid {modality} stream: {reason}")]
    InvalidStream { modality: Modality, reason: String },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("{modality} feature extraction failed: {reason}")]
    FeatureExtraction { modality: Modality, reason: String },

    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
