//! `dealer-sim`: run threshold dealer market simulations, sweep parameter
//! grids, and report trend metrics from tick CSVs.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod report;

use clap::{ArgGroup, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "dealer-sim",
    version,
    about = "Deterministic threshold dealer market simulator",
    after_help = "Environment:\n  DEALER_SIM_SEED  seed used when no preset override, config key, --set seed=,\n                   or --seed names one"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation; write a tick CSV and a run manifest beside it.
    Simulate(SimulateArgs),
    /// Run a grid of simulations over eps values and seeds.
    Sweep(SweepArgs),
    /// Print a trend report for a tick CSV (or an external two-column CSV).
    Analyze(AnalyzeArgs),
}

#[derive(Debug, clap::Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
pub struct SimulateArgs {
    /// Named scenario from the catalog.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML config file (flat keys; unknown keys rejected).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. --set eps_buyer=0.002. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Seed override; beats every other seed source.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output tick CSV path.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Base preset for the grid.
    #[arg(long)]
    pub preset: String,
    /// Comma-separated eps_buyer values (negative values welcome).
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub eps: Vec<f64>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,
    /// Directory for per-run CSVs, manifests, and the summary.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    /// Tick CSV (internal schema), or any two-column CSV with --external.
    pub path: PathBuf,
    /// Treat the file as an external (index, price) series.
    #[arg(long)]
    pub external: bool,
    /// Predicted bid-sum drift per deal for the conservation audit.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    /// Drop the first N rows before computing the report (useful for
    /// looking at the market after the start-up transient).
    #[arg(long, default_value_t = 0)]
    pub skip: usize,
    /// Also print the report as one machine-readable JSON line.
    #[arg(long)]
    pub machine: bool,
    /// Fraction of non-numeric data rows tolerated in external files.
    #[arg(long, default_value_t = 0.0)]
    pub tolerate_bad: f64,
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate(args) => commands::cmd_simulate(&args),
        Command::Sweep(args) => commands::cmd_sweep(&args),
        Command::Analyze(args) => commands::cmd_analyze(&args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
