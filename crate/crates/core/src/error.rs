use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("image is empty")]
    Empty,

    #[error("invalid dimensions: {0}")]
    Shape(String),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("non-finite intensity at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate data range: all inputs are constant and equal")]
    DegenerateRange,

    /// A metric or transform is mathematically undefined for this input.
    #[error("{0}")]
    Degenerate(String),

    #[error("image {actual:?} too small, need at least {required}x{required}")]
    TooSmall {
        required: usize,
        actual: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the numeric content of otherwise valid
    /// input (constant images, zero ranges, singular covariances).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateRange | Error::Degenerate(_) | Error::Singular(_)
        )
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
