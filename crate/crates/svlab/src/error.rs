//! Crate-wide error and result types.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, SvError>;

/// Errors produced by the lab.
#[derive(Debug, Error)]
pub enum SvError {
    /// A parameter or configuration value is structurally invalid
    /// (out-of-range hook target, incompatible style, bad grid, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A runtime input is unusable (empty prompt, oversized sequence,
    /// dataset too small, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Dataset validation failed; each entry names one offender.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A serialized file is malformed; `offset` is the byte at which
    /// reading failed.
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    /// Training diverged or the trained model missed its configured bar.
    #[error("training error at step {step}: {reason}")]
    Training { step: usize, reason: String },

    /// An extraction input was degenerate (for example an all-zero
    /// difference matrix).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SvError {
    pub fn config(msg: impl Into<String>) -> Self {
        SvError::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        SvError::Input(msg.into())
    }

    pub fn format(offset: u64, reason: impl Into<String>) -> Self {
        SvError::Format { offset, reason: reason.into() }
    }
}
