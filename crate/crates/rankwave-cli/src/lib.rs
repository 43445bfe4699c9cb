//! Batch front end for the `rankwave` library: list families, sample
//! fields to CSV or JSON, verify residuals, check compatibility conditions
//! and probe catastrophe times.
//!
//! Every command returns an [`Outcome`] carrying the text for standard
//! output and the process exit status, so the binary stays a thin shell.

pub mod commands;
pub mod config;
pub mod sampling;

use std::path::PathBuf;

use rankwave::catalog::CatalogError;
use rankwave::conditions::ConditionsError;
use rankwave::verifier::{GridError, VerifierError};
use thiserror::Error;

pub use commands::{cmd_catastrophe, cmd_conditions, cmd_list, cmd_sample, cmd_verify};
pub use config::{Format, MethodChoice, RunArgs, RunConfig};

/// Process exit statuses.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONSTRAINT: i32 = 3;
    pub const EMPTY: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error(transparent)]
    Conditions(#[from] ConditionsError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config file: {0}")]
    Config(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Catalog(
                CatalogError::Constraint { .. }
                | CatalogError::Validity(_)
                | CatalogError::Domain(_)
                | CatalogError::Fluid(_)
                | CatalogError::Special(_),
            ) => exit::CONSTRAINT,
            Self::Verifier(VerifierError::Empty(_)) => exit::EMPTY,
            _ => exit::USAGE,
        }
    }
}

/// What a command prints and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
}

impl Outcome {
    pub fn pass_if(pass: bool, stdout: String) -> Self {
        Self {
            status: if pass { exit::PASS } else { exit::FAIL },
            stdout,
        }
    }
}
