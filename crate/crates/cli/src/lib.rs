//! Command-line front end: `simulate`, `enumerate` and `calibrate`.
//!
//! Configs are JSON. Outputs land in `--out` (default `out/`):
//!
//! - `simulate`: `report.jsonl` (one [`EstimateReport`] per line) and
//!   `aggregate.csv` (columns in [`output::AGGREGATE_HEADER`])
//! - `enumerate`: `bounds.jsonl`
//! - `calibrate`: `thresholds.json`, a goal fragment, and `calibration.json`
//!
//! [`EstimateReport`]: devlab_core::montecarlo::EstimateReport

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};

use config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "devlab", version, about = "Deviation detection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate miss and blame probabilities by simulation.
    Simulate(RunArgs),
    /// Check the likelihood blame bounds exactly on a small instance.
    Enumerate(RunArgs),
    /// Calibrate random-walk thresholds on honest play.
    Calibrate(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub trials: Option<u64>,
    #[arg(long, value_name = "N")]
    pub horizon: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_name = "N", env = "DEVLAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, trials: self.trials, horizon: self.horizon }
    }

    fn threads(&self) -> usize {
        self.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a.config, a.overrides(), a.threads(), &a.out).map(drop),
        Command::Enumerate(a) => commands::enumerate(&a.config, a.overrides(), &a.out).map(drop),
        Command::Calibrate(a) => commands::calibrate(&a.config, a.overrides(), a.threads(), &a.out).map(drop),
    }
}

/// Parses arguments, runs, and maps failures to exit codes.
pub fn main_exit() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
