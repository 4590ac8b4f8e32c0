//! Experiment harness around `qpolar`: code construction, source and channel
//! simulations, degradation checks, CSV tables, SVG plots and the acceptance
//! suite.
//!
//! Experiments are described by key=value config files (see [`config`]).
//! Every CSV starts with `# key=value` metadata lines that include the full
//! resolved config, so a run can be repeated from its output alone.

pub mod commands;
pub mod config;
pub mod plot;
pub mod models;
pub mod table;
pub mod verify;

use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad table {path}: {msg}")]
    Table { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] qpolar::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::CheckFailed(_) => exit::CHECK_FAILED,
            _ => exit::RUNTIME,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
