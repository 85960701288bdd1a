//! Experiment harness behind the `infogain` binary.
//!
//! Subcommands: `run`, `compare`, `sweep`, `plot`, `trace`. Exit codes:
//! 0 success, 2 configuration error (nothing written), 3 runtime error.
//! See [`config`] for the config file grammar and [`commands`] for the
//! files each subcommand writes.

pub mod commands;
pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_compare, cmd_run, cmd_sweep, cmd_trace, RunOptions, RESULT_COLUMNS};
pub use config::ExperimentConfig;
pub use plot::{cmd_plot, PlotKind, PlotOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "infogain",
    version,
    about = "Decoding-order planning for masked diffusion models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Print entropies in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
    /// Replaces `seeds.base`.
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (sampler, seed) cell and write results.csv.
    Run(CommonArgs),
    /// Run at least two samplers and write summary.csv.
    Compare(CommonArgs),
    /// Run the Cartesian product of the [sweep] grid.
    Sweep(CommonArgs),
    /// Render an SVG from a CSV written by another subcommand.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// SVG path; defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Swept parameter column (sweep plots).
        #[arg(long, default_value = "tau_pos")]
        x: String,
        /// Metric column (sweep plots).
        #[arg(long, default_value = "mean_cumulative_entropy_nats")]
        y: String,
    },
    /// Print one trajectory as JSON.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        /// Sampler name or index; defaults to the first.
        #[arg(long)]
        sampler: Option<String>,
        /// Seed; defaults to the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl From<&CommonArgs> for RunOptions {
    fn from(a: &CommonArgs) -> Self {
        RunOptions {
            config: a.config.clone(),
            out: a.out.clone(),
            jobs: a.jobs,
            bits: a.bits,
            seed_override: a.seed_override,
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(&a.into()).map(|_| ()),
        Command::Compare(a) => cmd_compare(&a.into()).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a.into()).map(|_| ()),
        Command::Plot {
            csv,
            kind,
            out,
            x,
            y,
        } => cmd_plot(&PlotOptions {
            csv: csv.clone(),
            kind: *kind,
            out: out.clone(),
            x: x.clone(),
            y: y.clone(),
        })
        .map(|_| ()),
        Command::Trace {
            common,
            sampler,
            seed,
        } => cmd_trace(&common.into(), sampler.as_deref(), *seed).map(|json| {
            let _ = writeln!(std::io::stdout(), "{json}");
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("infogain: {e}");
            e.exit_code()
        }
    }
}
