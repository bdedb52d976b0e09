//! `gts`: batch driver for Gödel-type spacetime geodesics.
//!
//! One invocation reads one JSON config, runs the single command the config
//! declares, and writes artifacts (CSV trajectories, JSON reports) into the
//! output directory. Exit codes: 0 success (including FAIL verdicts from
//! checkers), 2 configuration or I/O error, 3 action-evaluation breakdown,
//! 4 solver nonconvergence.

mod commands;
mod config;
mod error;
mod jsonfmt;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::{execute, finish, Overrides};
use crate::error::{validation, CliError};

#[derive(Parser)]
#[command(
    name = "gts",
    version,
    about = "Geodesics on Gödel-type spacetimes: connect, shoot, probe, check, sweep"
)]
struct Cli {
    /// Optional command name (describe|connect|shoot|probe|check|sweep);
    /// must match the config's command block when given.
    command: Option<String>,

    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (overrides command.jobs).
    #[arg(long)]
    jobs: Option<usize>,

    /// Seed override for solver restarts, probes and check regions.
    #[arg(long)]
    seed: Option<u64>,

    /// Path segment count override for connect.
    #[arg(long)]
    segments: Option<usize>,

    /// Integration span override for shoot and probe.
    #[arg(long)]
    smax: Option<f64>,
}

fn run(cli: &Cli) -> error::Result<commands::Outcome> {
    let text = fs::read_to_string(&cli.config).map_err(|e| {
        CliError::Validation(format!("--config {}: {e}", cli.config.display()))
    })?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| validation(format!("--config {}: {e}", cli.config.display())))?;
    let cfg = config::parse_config(&doc)?;
    if let Some(name) = &cli.command {
        if name != cfg.command.name() {
            return Err(validation(format!(
                "command '{name}' given on the command line, but the config declares '{}'",
                cfg.command.name()
            )));
        }
    }
    let overrides = Overrides {
        out: cli.out.clone(),
        jobs: cli.jobs,
        seed: cli.seed,
        segments: cli.segments,
        smax: cli.smax,
    };
    finish(execute(&cfg, &overrides)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.verdict);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
