//! `majdyn`: run majority-dynamics experiments from the command line.
//!
//! Exit status is 0 on success, 1 for usage and configuration errors and 2
//! for failures while running. Data goes to stdout or `--output`; logs go to
//! stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "majdyn", version, about = "Majority dynamics on Erdős–Rényi random graphs", arg_required_else_help = true)]
struct Cli {
    /// Increase log detail on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write the per-trial report.
    Run(ExperimentArgs),
    /// Repeat an experiment over a grid of discrepancies or edge probabilities.
    Sweep(SweepArgs),
    /// Count almost-positive and unstable vertices under the morning/evening model.
    Census(CensusArgs),
    /// Median bias growth |S_{t+1}|/|S_t| for the first days.
    Growth(ExperimentArgs),
    /// Minority decay after the bias crosses a floor.
    Contraction(ContractionArgs),
    /// Check the binomial estimates on random configurations and print a table.
    VerifyLemmas(VerifyArgs),
    /// Sample G(n, p) and write it in the binary graph format.
    GenGraph(GenGraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// TOML config file with ExperimentConfig keys.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Config override KEY=VALUE, applied after the config file; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Number of vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability: a number, `lower` or `upper`.
    #[arg(long)]
    p: Option<String>,
    /// Number of independent trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial opinion model.
    #[arg(long, value_parser = ["uniform", "fixed-discrepancy", "morning-evening"])]
    model: Option<String>,
    /// Last simulated day.
    #[arg(long)]
    day_cap: Option<u32>,
    /// Reuse one graph for all trials.
    #[arg(long)]
    quenched: bool,
    /// Report format (default csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent. CSV reports also write <PATH>.aggregates.csv.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated initial discrepancies (fixed-discrepancy model).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "p_grid", required_unless_present = "p_grid")]
    d: Vec<i64>,
    /// Comma-separated edge probabilities.
    #[arg(long, value_delimiter = ',')]
    p_grid: Vec<f64>,
}

#[derive(Debug, Args)]
struct CensusArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Almost-positive threshold γ (default 0.1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Swing coefficient c (default 1).
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Args)]
struct ContractionArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Bias floor; defaults to ⌈8β/(p·sqrt δ)⌉ with β = sqrt(np).
    #[arg(long)]
    bias_floor: Option<i64>,
    /// Minimum-degree parameter δ.
    #[arg(long, default_value_t = 0.9)]
    delta: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random configurations per check.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Largest binomial trial count drawn.
    #[arg(long, default_value_t = 400)]
    max_trials: u64,
    /// Seed for the random configurations.
    #[arg(long, default_value_t = 2021)]
    seed: u64,
    /// Table format (default csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenGraphArgs {
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Edge probability in [0, 1].
    #[arg(long)]
    p: f64,
    /// Graph seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination of the binary graph.
    #[arg(short, long, value_name = "PATH")]
    output: PathBuf,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<majdyn::harness::HarnessError> for Failure {
    fn from(e: majdyn::harness::HarnessError) -> Self {
        match e {
            majdyn::harness::HarnessError::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() || e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    let (msg, code) = match commands::dispatch(cli.command) {
        Ok(()) => return ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => (msg, 1),
        Err(Failure::Runtime(msg)) => (msg, 2),
    };
    eprintln!("error: {}", one_line(&msg));
    ExitCode::from(code)
}

/// Collapses a multi-line diagnostic onto a single line.
fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}
