//! Driver behind the `hvz` binary: config ingestion, the five subcommands and
//! report writing.
//!
//! Exit codes are a stable contract: 0 success, 1 config error, 2 partial
//! convergence or a failed verification, 3 oracle failure.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::path::PathBuf;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

/// Bad or inconsistent input; always exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A command's failure together with the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.0,
        }
    }
}

impl From<hvz_core::Error> for Failure {
    fn from(e: hvz_core::Error) -> Self {
        use hvz_core::Error::*;
        let code = match e {
            OracleFailure(_) => EXIT_ORACLE,
            ConvergenceFailure { .. } => EXIT_PARTIAL,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: format!("output error: {e}"),
        }
    }
}

/// What a finished command hands back to `main`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Printed to stdout.
    pub text: String,
    pub files: Vec<PathBuf>,
}
