//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file contents (bad magic, truncated payload, illegal header).
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Input violates an operation precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input is valid but carries no usable signal (e.g. an all-zero density).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A representation was paired with a template it was not built from.
    #[error("template mismatch: expected {expected:#018x}, found {found:#018x}")]
    TemplateMismatch { expected: u64, found: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
