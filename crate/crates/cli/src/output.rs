//! CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SOLVE_COLUMNS: [&str; 16] = [
    "run_id",
    "kind",
    "scenario",
    "lambda",
    "theta",
    "branch_id",
    "k2",
    "k1",
    "k0",
    "k0_displayed",
    "variance",
    "mean_slope",
    "mean_intercept",
    "residual",
    "value",
    "note",
];

pub const SIMULATE_COLUMNS: [&str; 17] = [
    "run_id",
    "scenario",
    "lambda",
    "theta",
    "x0",
    "n_paths",
    "n_diverged",
    "dt",
    "horizon",
    "n_steps",
    "estimate",
    "std_error",
    "closed_form",
    "gap",
    "within_3se",
    "truncation",
    "valid",
];

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["run_id", "t", "path_id", "x", "running_cost"];

pub const VERIFY_COLUMNS: [&str; 8] = ["run_id", "check_name", "instance_id", "lhs", "rhs", "gap", "tolerance", "pass"];

pub const SWEEP_COLUMNS: [&str; 7] = ["run_id", "param", "param_value", "scenario", "metric", "value", "note"];

/// 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

/// Header plus string rows, written once at the end of a command.
pub struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
        w.write_record(self.columns).map_err(|e| CliError::io(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

/// Hash of everything that determines the numbers in a run. The worker
/// count is deliberately left out.
pub fn run_id(config_text: &str, command: &str, fingerprint: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    for part in [config_text, command, fingerprint, &seed.to_string(), env!("CARGO_PKG_VERSION")] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config_path: PathBuf,
    pub command: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub output_dir: PathBuf,
    pub tool_version: String,
    pub workers: Option<usize>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(run_id: &str, config_path: &Path, command: &str, seed: u64, output_dir: &Path, workers: Option<usize>) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        RunManifest {
            run_id: run_id.to_string(),
            config_path: config_path.to_path_buf(),
            command: command.to_string(),
            seed,
            timestamp,
            output_dir: output_dir.to_path_buf(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self) -> Result<(), CliError> {
        let path = self.output_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}
