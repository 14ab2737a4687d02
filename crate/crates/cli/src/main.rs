//! `cascade-clt`: threshold cascades on configuration-model multigraphs.
//!
//! Subcommands: `theory` (analytic limits), `simulate` (one event-driven
//! trajectory), `verify` (the statistical verification suite), `sweep`
//! (finite-size convergence), `graph` (edge-list dump).
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure
//! (quadrature non-convergence, overflow, or a failed run), 3 verification
//! failure. All output files are written atomically; stdout carries
//! human-readable progress and the files carry the data.

#![forbid(unsafe_code)]

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use cascade_core::cascade::CascadeError;
use cascade_core::cgm::CgmError;
use cascade_core::dist::DistError;
use cascade_core::mc::McError;
use cascade_core::stats::StatsError;
use cascade_core::theory::TheoryError;
use clap::{Args, Parser, Subcommand};

use config::{CommonArgs, FlagInput, QuadArgs, Settings};

/// Tiered CLI failure; the variant decides the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files, or field values (exit 1).
    Config(String),
    /// A numerical routine failed: quadrature, root finding, overflow, or
    /// a simulation run (exit 2).
    Numerical(String),
    /// The verification suite ran and rejected (exit 3).
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical: {msg}"),
            CliError::Verification(msg) => write!(f, "verification: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<CgmError> for CliError {
    fn from(e: CgmError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::EmptyPopulation
            | McError::NoTrials
            | McError::BadEvalTime { .. }
            | McError::BadSweepList => CliError::Config(e.to_string()),
            McError::Graph { .. } | McError::Run { .. } | McError::Analytic(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

/// Threshold cascades on configuration-model multigraphs: simulation,
/// analytic limits, and statistical verification.
#[derive(Debug, Parser)]
#[command(name = "cascade-clt", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the analytic limits and write theory.json plus a curve CSV
    Theory(TheoryArgs),
    /// Run one event-driven trajectory and write trajectory and occupancy CSVs
    Simulate(SimulateArgs),
    /// Run the statistical verification suite and write its artifacts
    Verify(VerifyArgs),
    /// Tabulate finite-size convergence over a ladder of population sizes
    Sweep(SweepArgs),
    /// Realize one random multigraph and write its edge list
    Graph(GraphArgs),
}

#[derive(Debug, Args)]
struct TheoryArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    quad: QuadArgs,

    /// Grid points in the curve CSV. [default: 101]
    #[arg(long, value_name = "K")]
    curve_points: Option<usize>,

    /// Upper end of the curve grid. [default: stopping time + 1, or the
    /// horizon when the process never stops]
    #[arg(long, value_name = "T")]
    curve_max_t: Option<f64>,
}

impl TheoryArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut input = FlagInput::from_common(&self.common);
        input.quad = Some(&self.quad);
        input.curve_points = self.curve_points;
        input.curve_max_t = self.curve_max_t;
        config::resolve(&input)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Nodes in the realization. [default: 10000]
    #[arg(long, value_name = "N")]
    n: Option<usize>,

    /// Root seed for realization, pairing, and event order; setting it to
    /// the `seed` column of a trial record replays that trial. [default: 0]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Occupancy snapshots spread over [0, tau]; 0 disables. [default: 11]
    #[arg(long, value_name = "K")]
    snapshot_points: Option<usize>,
}

impl SimulateArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut input = FlagInput::from_common(&self.common);
        input.n = self.n;
        input.seed = self.seed;
        input.snapshot_points = self.snapshot_points;
        config::resolve(&input)
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Directory the verification artifacts are written into. [default: .]
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads for trial batches; outputs are byte-identical for
    /// any value. Env fallback: CASCADE_CLT_WORKERS. [default: all cores]
    #[arg(long, value_name = "W")]
    workers: Option<usize>,

    /// Test hook: judge the fluctuation criterion against this variance
    /// instead of the analytic one.
    #[arg(long, value_name = "V", hide = true)]
    inject_sigma2: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    quad: QuadArgs,

    /// Population sizes, comma-separated, strictly increasing.
    /// [default: 1000,10000,100000]
    #[arg(long, value_name = "N1,N2,...", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,

    /// Trials per population size. [default: 500]
    #[arg(long, value_name = "T")]
    trials: Option<usize>,

    /// Root seed for the whole table. [default: 0]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Evaluation time for the fluctuation statistic.
    /// [default: stopping time + 1]
    #[arg(long, value_name = "T")]
    eval_time: Option<f64>,

    /// Worker threads for trial batches; results are identical for any
    /// value. Env fallback: CASCADE_CLT_WORKERS. [default: all cores]
    #[arg(long, value_name = "W")]
    workers: Option<usize>,
}

impl SweepArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut input = FlagInput::from_common(&self.common);
        input.quad = Some(&self.quad);
        input.n_list = self.n_list.as_deref();
        input.trials = self.trials;
        input.seed = self.seed;
        input.eval_time = self.eval_time;
        input.workers = self.workers;
        config::resolve(&input)
    }
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Nodes in the realization. [default: 10000]
    #[arg(long, value_name = "N")]
    n: Option<usize>,

    /// Root seed for realization and pairing. [default: 0]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

impl GraphArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut input = FlagInput::from_common(&self.common);
        input.n = self.n;
        input.seed = self.seed;
        config::resolve(&input)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Theory(args) => commands::theory(&args.settings()?),
        Command::Simulate(args) => commands::simulate(&args.settings()?),
        Command::Verify(args) => {
            let out_dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            let workers = config::resolve_workers(args.workers, None)?;
            commands::verify(&out_dir, workers, args.inject_sigma2)
        }
        Command::Sweep(args) => commands::sweep(&args.settings()?),
        Command::Graph(args) => commands::graph(&args.settings()?),
    }
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => {
                eprintln!("error: {err}");
                ExitCode::from(err.exit_code())
            }
        },
        Err(err) => {
            // Help and version requests print to stdout and succeed; real
            // parse failures are configuration errors (exit code 1).
            let is_failure = err.use_stderr();
            let _ = err.print();
            if is_failure {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
