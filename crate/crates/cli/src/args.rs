use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "explq", version, about = "Robust entropy-regularized LQ control: solve, simulate, verify, sweep")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Problem description (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory for CSV files and the run manifest.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,

    /// Overrides `solver.seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Proceed even when a blocking assumption fails.
    #[arg(long, global = true)]
    pub force: bool,

    /// Turn flagged rows (diverged simulations, failed sweep points) into a
    /// nonzero exit.
    #[arg(long, global = true)]
    pub strict: bool,

    #[arg(long, short, global = true)]
    pub verbose: bool,

    /// Worker threads for Monte-Carlo runs. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Per-scenario value functions, two-point branches and the robust value.
    Solve,
    /// Monte-Carlo cost estimates against the closed-form values.
    Simulate(SimulateArgs),
    /// Runs the verification suite; exits 0 iff every check passes.
    Verify,
    /// Repeats solve over a list of values of one parameter.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Simulate(_) => "simulate",
            Command::Verify => "verify",
            Command::Sweep(_) => "sweep",
        }
    }

    /// Argument string that enters the run id.
    pub fn fingerprint(&self) -> String {
        match self {
            Command::Solve | Command::Verify => String::new(),
            Command::Simulate(a) => format!(
                "paths={:?};dt={:?};horizon={:?};dump={};stride={}",
                a.paths, a.dt, a.horizon, a.dump_paths, a.dump_stride
            ),
            Command::Sweep(a) => format!("param={};values={:?}", a.param, a.values),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Overrides `solver.paths`.
    #[arg(long)]
    pub paths: Option<usize>,

    /// Overrides `solver.dt`.
    #[arg(long)]
    pub dt: Option<f64>,

    /// Overrides `solver.horizon`.
    #[arg(long)]
    pub horizon: Option<f64>,

    /// Writes the first N paths to trajectories.csv.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub dump_paths: usize,

    /// Step stride of the trajectory dump.
    #[arg(long, value_name = "K", default_value_t = 10)]
    pub dump_stride: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary, e.g. alpha, rho, lambda, A.
    #[arg(long)]
    pub param: String,

    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
}
