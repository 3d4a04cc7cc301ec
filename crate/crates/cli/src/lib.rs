//! `considerate` command-line driver.

pub mod commands;
pub mod config;
pub mod serve;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use considerate_core::sim::{Condition, ParticipantPreset};
use thiserror::Error;

use crate::config::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Diagnostics(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Data(_) => 2,
            CliError::Diagnostics(_) => 3,
        }
    }
}

impl From<considerate_core::LogError> for CliError {
    fn from(e: considerate_core::LogError) -> Self {
        match e {
            considerate_core::LogError::Io { path, source } => CliError::Io { path, source },
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "considerate", version, about = "Human-robot consideration model lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trial and write its log and a trajectory CSV.
    Simulate(SimulateArgs),
    /// Run every robot condition for N seeds and write logs plus a manifest.
    Experiment(ExperimentArgs),
    /// Compute metrics, ANOVA, pairwise tests and the trend posterior.
    Analyze(AnalyzeArgs),
    /// Host live sessions over WebSocket.
    Serve(ServeArgs),
    /// Print summary tables comparing conditions.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    /// Participant preset, overriding the scenario's.
    #[arg(long)]
    pub participant: Option<ParticipantPreset>,
    /// Participant consideration gain, overriding the preset's.
    #[arg(long, allow_hyphen_values = true)]
    pub participant_psi: Option<f64>,
    /// Output directory [default: $CONSIDERATE_OUT or ./runs].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// psi_0.001, psi_0.005, psi_0.01 or random_walk.
    #[arg(long, conflicts_with = "psi_robot")]
    pub condition: Option<Condition>,
    /// Robot consideration gain: 0.001, 0.005 or 0.01.
    #[arg(long)]
    pub psi_robot: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Trials per condition.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Trial i runs with seed base_seed + i.
    #[arg(long)]
    pub base_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// Avoidance on pole tasks.
    Avoid,
    /// Path length on object tasks.
    Path,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory with trajectory logs and, optionally, a manifest.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Where to write results [default: the input directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Avoid)]
    pub metric: Metric,
    #[arg(long, default_value_t = 4)]
    pub mcmc_chains: usize,
    #[arg(long, default_value_t = 10_000)]
    pub mcmc_length: usize,
    #[arg(long, default_value_t = 5_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 0)]
    pub mcmc_seed: u64,
    /// Sample the prior only.
    #[arg(long)]
    pub prior_only: bool,
    /// Label permutations per pairwise test.
    #[arg(long, default_value_t = considerate_core::analysis::DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub permutation_seed: u64,
    /// Exit 3 when convergence diagnostics are flagged or a test cannot run.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Condition for sessions that do not name one.
    #[arg(long, default_value = "psi_0.001")]
    pub condition: Condition,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Where finished session logs are written [default: $CONSIDERATE_OUT or ./runs].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory with trajectory logs, and optionally `analyze` outputs.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` and runs the command, mapping failures to exit codes.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Experiment(args) => commands::experiment(&args),
        Command::Analyze(args) => commands::analyze(&args),
        Command::Serve(args) => serve::serve(&args),
        Command::Report(args) => commands::report(&args),
    }
}
