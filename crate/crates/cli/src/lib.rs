//! Command-line front end: loads a TOML problem, runs one workflow and writes
//! CSV results plus a `manifest.json` into the output directory.

pub mod args;
pub mod output;
mod simulate;
mod solve;
mod sweep;
mod verify;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use explq_core::model::RunConfig;
use explq_core::robust::robust_value;
use explq_core::{coefficients_at, validate, CoefficientFamily, Problem, RobustSolution, ThetaCoefficients, ThetaValueFunction, ValidationReport};

use args::{Cli, Command, GlobalArgs};
use output::{RunManifest, Table};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<explq_core::Error> for CliError {
    fn from(e: explq_core::Error) -> Self {
        if e.is_configuration() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Everything a command needs: the parsed config, the flags and the
/// manifest being filled in.
pub(crate) struct Context {
    pub cfg: RunConfig,
    pub global: GlobalArgs,
    pub seed: u64,
    pub run_id: String,
    pub manifest: RunManifest,
}

impl Context {
    fn load(global: &GlobalArgs, command: &Command) -> Result<Self, CliError> {
        let path = global
            .config
            .clone()
            .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let cfg = RunConfig::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let seed = global.seed.unwrap_or(cfg.sim.seed);
        let run_id = output::run_id(&text, command.name(), &command.fingerprint(), seed);
        fs::create_dir_all(&global.out).map_err(|e| CliError::io(&global.out, e))?;
        let manifest = RunManifest::new(&run_id, &path, command.name(), seed, &global.out, global.workers);
        Ok(Context { cfg, global: global.clone(), seed, run_id, manifest })
    }

    /// Validates `cfg`; a failed blocking check stops the run unless
    /// `--force` is set.
    fn gate(&self, cfg: &RunConfig) -> Result<ValidationReport, CliError> {
        let report = validate(&cfg.problem, cfg.lambda)?;
        if !report.admits_solve() {
            let failed: Vec<String> = report
                .failures()
                .filter(|c| c.blocking)
                .map(|c| format!("{} ({} vs {}{})", c.name, c.lhs, c.rhs, note_suffix(&c.note)))
                .collect();
            if !self.global.force {
                return Err(CliError::Config(format!(
                    "assumption check failed: {}; rerun with --force to proceed",
                    failed.join(", ")
                )));
            }
            eprintln!("warning: proceeding past failed assumptions (--force): {}", failed.join(", "));
        }
        Ok(report)
    }

    fn write(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        table.write(&self.global.out.join(name))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(&self) -> Result<(), CliError> {
        self.manifest.write()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.global.out.clone()
    }
}

fn note_suffix(note: &str) -> String {
    if note.is_empty() { String::new() } else { format!("; {note}") }
}

/// One coefficient set that enters the robust value, with its solution.
pub(crate) struct Scenario {
    pub label: String,
    /// Weight of `θ1` in the Dirac measure this scenario represents.
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub coeffs: ThetaCoefficients,
    pub v: ThetaValueFunction,
}

/// Robust solution at `x` and the scenarios behind it: both points of a
/// two-point family, or the quadrature nodes at the worst-case `a`.
pub(crate) fn solve_scenarios(problem: &Problem, x: f64) -> Result<(RobustSolution, Vec<Scenario>), CliError> {
    let sol = robust_value(problem, x)?;
    let mut out = Vec::with_capacity(sol.per_theta.len());
    for (j, (theta, v)) in sol.per_theta.iter().enumerate() {
        let (label, lambda, theta_col, coeffs) = match &problem.family {
            CoefficientFamily::Single(c) => ("theta1".to_string(), Some(1.0), Some(1.0), *c),
            CoefficientFamily::TwoPoint { .. } => {
                let lam = if j == 0 { 1.0 } else { 0.0 };
                (format!("theta{}", j + 1), Some(lam), Some(*theta), coefficients_at(&problem.family, *theta)?)
            }
            CoefficientFamily::UniformPoly(_) => {
                (format!("node{j:02}"), None, Some(*theta), coefficients_at(&problem.family, *theta)?)
            }
        };
        out.push(Scenario { label, lambda, theta: theta_col, coeffs, v: v.clone() });
    }
    Ok((sol, out))
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    let mut ctx = Context::load(&cli.global, &cli.command)?;
    let code = match &cli.command {
        Command::Solve => solve::run(&mut ctx)?,
        Command::Simulate(a) => simulate::run(&mut ctx, a)?,
        Command::Verify => verify::run(&mut ctx)?,
        Command::Sweep(a) => sweep::run(&mut ctx, a)?,
    };
    ctx.finish()?;
    Ok(code)
}
