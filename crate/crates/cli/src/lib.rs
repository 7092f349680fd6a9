//! Batch front end: checks, constructions, verification of result
//! directories, and the interval Laplacian demos.
//!
//! Exit codes: 0 pass, 2 domain failure (majorization, regime,
//! construction, verification), 3 I/O or format failure.

pub mod commands;
pub mod config;

use serde_json::Value;
use thiserror::Error;

pub use commands::{cmd_check, cmd_construct, cmd_demo, cmd_export, cmd_verify, run_problem};
pub use config::{Overrides, Problem, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Format(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Io(_) | CliError::Format(_) => EXIT_IO,
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Domain(_) => "domain",
            CliError::Io(_) => "io",
            CliError::Format(_) => "format",
        };
        serde_json::json!({ "pass": false, "error": kind, "reason": self.to_string() })
    }
}

/// What a subcommand prints to stdout, and its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub json: Value,
}

impl Outcome {
    pub fn new(pass: bool, json: Value) -> Self {
        Self {
            code: if pass { EXIT_OK } else { EXIT_DOMAIN },
            json,
        }
    }
}
