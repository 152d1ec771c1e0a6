//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, I/O, and the analysis stages.
///
/// The variants are deliberately coarse: callers (in particular the CLI)
/// dispatch on the *kind* of failure, not on individual error sites.
#[derive(Debug, Error)]
pub enum StxError {
    /// An argument violated an operation's preconditions (inverted bounds,
    /// unknown names, out-of-range parameters, empty inputs, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A byte stream is not a grid container at all (bad magic, unsupported
    /// version or value type).
    #[error("format error: {0}")]
    Format(String),

    /// A byte stream declares a layout its payload does not satisfy
    /// (truncation, trailing bytes, dimension/payload mismatch).
    #[error("corrupt container: {0}")]
    Corrupt(String),

    /// Data failed a structural invariant (non-monotone axes, gapped time
    /// axis, mismatched shapes between grids).
    #[error("validation error: {0}")]
    Validation(String),

    /// A computation could not produce a meaningful result from the data
    /// (empty percentile pool, degenerate fit input).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, StxError>;

impl StxError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        StxError::Domain(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        StxError::Format(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        StxError::Corrupt(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        StxError::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        StxError::Numerical(msg.into())
    }
}
