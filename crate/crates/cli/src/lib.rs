//! The `freeact` workbench: TOML configs in, text and JSON reports out.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use commands::{Command, Context, OpKind};
pub use config::WorkbenchConfig;
pub use error::CliError;
pub use report::Report;

#[derive(Clone, Debug, Parser)]
#[command(name = "freeact", version, about = "Free actions of finite abelian groups via factor systems")]
pub struct Cli {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Coefficient truncation `N`, overriding the config.
    #[arg(long, global = true)]
    pub truncation: Option<u64>,
    /// Directory for cached cohomology results.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Seed for randomized checks; without one they are skipped.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Load inputs, run the command and time it.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let config = cli.config.as_deref().map(WorkbenchConfig::load).transpose()?;
    let cache = match (&cli.cache, cli.no_cache) {
        (Some(dir), false) => Some(cache::Cache::new(dir)?),
        _ => None,
    };
    let ctx = Context { config, config_path: cli.config.clone(), truncation: cli.truncation, seed: cli.seed, cache };
    let start = Instant::now();
    let mut report = commands::run(&cli.command, &ctx)?;
    report.runtime.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Exit status for a finished report: verdicts are data, broken invariants are bugs.
pub fn exit_status(report: &Report) -> i32 {
    if report.invariant_violations.is_empty() {
        0
    } else {
        2
    }
}
