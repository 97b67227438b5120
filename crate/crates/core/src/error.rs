use std::path::PathBuf;

/// Errors produced by the modulator toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("channel mismatch: expected {expected} channels, found {found}")]
    ChannelMismatch { expected: usize, found: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("symbol dimension mismatch: graph expects {expected}, frame has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid layer: {0}")]
    InvalidLayer(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate dataset: design matrix has a null space of dimension {null_space_dim}")]
    DegenerateDataset { null_space_dim: usize },

    #[error("training diverged at epoch {epoch} (non-finite loss); lower the learning rate")]
    Diverged { epoch: usize },

    #[error("no frame detected: peak correlation metric {metric:.3} below threshold {threshold:.3}")]
    NoFrame { metric: f64, threshold: f64 },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("manifest schema error: {0}")]
    Schema(String),

    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
