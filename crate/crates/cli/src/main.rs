//! `greet`: command-line front end for the slicing engine.
//!
//! Scenarios and sweeps are described in TOML/JSON files; behaviour switches
//! are flags. Exit codes: 0 success, 1 domain failure, 2 usage or parse error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use greet_core::experiments::Family;

/// Environment override for `--out-dir` (the only environment setting read).
pub const OUT_DIR_ENV: &str = "GREET_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "greet", version, about = "Network-slicing game engine: GREET allocation, dynamics, social optimum and desk-scale sweeps")]
pub struct Cli {
    /// Log verbosity: -v info, -vv debug, -vvv trace (warnings are always shown).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Directory for CSV outputs. Falls back to $GREET_OUT_DIR; without
    /// either, the primary CSV goes to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file; prints a JSON report (exit 1 if invalid).
    Validate {
        /// Scenario file (.toml, or .json).
        config: PathBuf,
    },
    /// One-shot GREET allocation of the bids in the scenario file (CSV).
    Allocate {
        config: PathBuf,
        /// Weight floor δ, overriding `weight_floor_delta`.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Iterate GREET share rounds (or best responses) and report convergence.
    Dynamics(DynamicsArgs),
    /// Social-optimal weights and rates (CSV).
    SolveSo(SolveSoArgs),
    /// Simulate one radio trace and dimension the guaranteed shares on it (CSV).
    Dimension(DimensionArgs),
    /// Run the experiment sweep; writes per-seed CSV, aggregate CSV and a summary.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Round-robin: slices update one after another.
    Rr,
    /// Simultaneous: all slices update from the same snapshot.
    Sim,
    /// Asynchronous: Poisson clocks with bounded window and staleness.
    Async,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// GREET share-allocation policy.
    Greet,
    /// Exact best responses (round-robin only).
    BestResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivergenceArg {
    /// Abort when a minimum rate cannot be protected.
    Fail,
    /// Give up on the affected users and continue.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Baseline,
    Uniform,
    Aligned,
    Orthogonal,
    Mixed,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Baseline => Family::Baseline,
            FamilyArg::Uniform => Family::Uniform,
            FamilyArg::Aligned => Family::Aligned,
            FamilyArg::Orthogonal => Family::Orthogonal,
            FamilyArg::Mixed => Family::Mixed,
        }
    }
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "rr")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "greet")]
    pub rule: RuleArg,
    /// Round cap (update events in async mode).
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    /// Step-norm convergence tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Weight floor δ, overriding `weight_floor_delta`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Seed for the async schedule and best-response restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Async window W (default: number of slices).
    #[arg(long)]
    pub window: Option<usize>,
    /// Async staleness bound D (events).
    #[arg(long, default_value_t = 3)]
    pub staleness: usize,
    #[arg(long, value_enum, default_value = "fail")]
    pub divergence: DivergenceArg,
}

#[derive(Debug, Args)]
pub struct SolveSoArgs {
    pub config: PathBuf,
    /// Per-station water-filling instead of multi-start gradient ascent.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    /// Gradient iterations per start and barrier stage.
    #[arg(long, default_value_t = 5000)]
    pub iterations: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    /// Sweep config supplying radio, population and P_max (default: desk scale).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "baseline")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the number of epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config file; omitted keys keep desk-scale defaults.
    #[arg(long, conflicts_with = "full_scale")]
    pub config: Option<PathBuf>,
    /// 19-site preset instead of the desk-scale one.
    #[arg(long)]
    pub full_scale: bool,
    /// Restrict to these families (repeatable).
    #[arg(long, value_enum)]
    pub family: Vec<FamilyArg>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Comma-separated elastic share totals.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    match commands::run(cli.command, out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
