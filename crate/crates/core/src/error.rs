//! Error types shared across the crate.

use std::path::PathBuf;

/// Errors produced by tensor ops, layers, training and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor extents do not line up for the requested operation.
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// An argument violates the operation's contract (not a shape issue).
    #[error("invalid parameter for {op}: {detail}")]
    Param { op: &'static str, detail: String },

    /// Dataset layout or content problem (missing class dir, bad label, ...).
    #[error("dataset error: {0}")]
    Data(String),

    /// A non-finite value appeared where the contract requires finite ones.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Malformed file content (PNM header, config text, CSV, ...).
    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Distinct failure kinds for checkpoint loading.
#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("bad magic (expected \"MBAT\")")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u16),
    #[error("truncated file while reading {0}")]
    Truncated(String),
    #[error("tensor shape disagreement for \"{name}\": {detail}")]
    ShapeDisagreement { name: String, detail: String },
}

impl Error {
    pub fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape { op, detail: detail.into() }
    }

    pub fn param(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Param { op, detail: detail.into() }
    }

    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format { path: path.into(), detail: detail.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Prefix the failure with the model layer it surfaced in.
    pub fn in_layer(self, layer: &str) -> Self {
        match self {
            Error::Shape { op, detail } => Error::Shape {
                op,
                detail: format!("layer `{layer}`: {detail}"),
            },
            Error::Param { op, detail } => Error::Param {
                op,
                detail: format!("layer `{layer}`: {detail}"),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
