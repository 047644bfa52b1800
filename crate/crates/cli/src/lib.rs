//! Command-line front end: argument handling, per-command defaults and
//! stable CSV/JSON output.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use thiserror::Error;

pub use args::{Cli, Command, Format, Options};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] kicktop_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for a numerical invariant violation, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(kicktop_core::Error::InvariantViolation(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// Applies the config file, runs the command and writes its output.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut options = cli.options;
    if let Some(path) = options.config.clone() {
        config::apply_file(&mut options, &path)?;
    }
    commands::execute(cli.command, &options)
}
