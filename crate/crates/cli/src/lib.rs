//! Batch driver for the qlattice verification suites.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (a
//! `<command>-<seed>-failures.json` manifest is written), 2 for usage,
//! configuration and I/O errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub mod config;
pub mod random;
pub mod report;
pub mod suites;

use config::{Cli, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] qlattice::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = std::panic::catch_unwind(|| run(cli));
    match result {
        Ok(Ok(passed)) => i32::from(!passed),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(_) => {
            eprintln!("error: internal failure");
            1
        }
    }
}

/// Runs the configured command and writes its reports. Returns whether all
/// checks passed.
pub fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let report = suites::execute(&cfg)?;
    for path in report.write(&cfg.out)? {
        println!("wrote {}", path.display());
    }
    for c in &report.checks {
        println!("{} {}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.requirement);
    }
    Ok(report.passed)
}
