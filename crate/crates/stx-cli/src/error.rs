//! Stage-tagged errors and their process exit codes.
//!
//! Every failure names the pipeline stage it happened in and maps to one of
//! three exit codes:
//!
//! * `2` — configuration errors: unreadable/invalid config, unknown keys or
//!   structure names, bad input paths, invalid flag values.
//! * `3` — data validation errors: malformed containers, inconsistent grid
//!   shapes, values that violate the input contract.
//! * `4` — numerical failures: a computation that cannot proceed on
//!   otherwise well-formed data (e.g. an empty anomaly pool at the
//!   thresholding step).

use std::fmt;

use stx::error::StxError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// An error bound to the stage that produced it.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl CliError {
    /// A configuration problem (exit 2), regardless of underlying kind.
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            stage: "config",
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    /// Wraps a library error that occurred while running `stage`.
    ///
    /// Numerical failures keep their own exit code; everything else that
    /// happens mid-run (domain violations, malformed or inconsistent data,
    /// I/O trouble) is a data validation failure.
    pub fn in_stage(stage: &'static str, err: StxError) -> Self {
        let code = match err {
            StxError::Numerical { .. } => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        CliError {
            stage,
            code,
            message: err.to_string(),
        }
    }

    /// A validation failure detected by the CLI itself.
    pub fn validation(stage: &'static str, message: impl Into<String>) -> Self {
        CliError {
            stage,
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Extension to attach a stage to library results.
pub trait StageExt<T> {
    fn in_stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> StageExt<T> for stx::error::Result<T> {
    fn in_stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::in_stage(stage, e))
    }
}
