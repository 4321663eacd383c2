//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, FfaError>;

#[derive(Debug, Error)]
pub enum FfaError {
    #[error("non-finite value in input: {0}")]
    NonFiniteInput(String),

    #[error("empty vector passed to {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad magic number in {path}: found {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: String,
        found: u32,
        expected: u32,
    },

    #[error("truncated file {path}: {detail}")]
    TruncatedFile { path: String, detail: String },

    #[error("degenerate variance: dataset standard deviation {sigma} below 1e-8")]
    DegenerateVariance { sigma: f64 },

    #[error("label {label} out of range for {num_classes} classes in {path}")]
    LabelOutOfRange {
        path: String,
        label: u32,
        num_classes: usize,
    },

    #[error("non-finite loss at epoch {epoch}, batch {batch} [{context}]")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        context: String,
    },

    #[error("non-finite gradient in layer {layer} [{context}]")]
    NonFiniteGradient { layer: usize, context: String },

    #[error("checkpoint format error in {path}: {detail}")]
    CheckpointFormat { path: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FfaError {
    /// Attach a path to a bare I/O error.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        FfaError::Io {
            path: path.into(),
            source,
        }
    }
}
