//! TOML problem descriptions.
//!
//! ```toml
//! [dynamics]
//! A = 0.0          # scalar, [theta1, theta2] or polynomial coefficients
//! B = 1.0
//! C = 0.0
//! D = 1.0
//!
//! [cost]
//! L = 1.0
//! S = 0.0
//! R = 1.0
//! M = 0.0
//! N = 0.0
//!
//! [robust]
//! family = "single"  # "single" | "two_point" | "uniform"
//! lambda = 1.0       # two_point only
//! a1 = 0.5           # uniform only
//! a2 = 1.0
//!
//! [solver]
//! rho = 2.0
//! alpha = 0.5
//! state_bound = 5.0
//! x0 = 1.0
//! dt = 1e-3
//! horizon = 4.6      # defaults to ln(1e4)/rho
//! paths = 100000
//! seed = 42
//! ```

use toml::{Table, Value};

use super::{CoeffPolys, CoefficientFamily, Poly, Problem, ThetaCoefficients, UniformFamily, MAX_DEGREE};
use crate::error::{Error, Result};

/// Parameters accepted by [`RunConfig::with_override`], with their section.
pub const OVERRIDABLE_PARAMS: [(&str, &str); 20] = [
    ("A", "dynamics"),
    ("B", "dynamics"),
    ("C", "dynamics"),
    ("D", "dynamics"),
    ("L", "cost"),
    ("S", "cost"),
    ("R", "cost"),
    ("M", "cost"),
    ("N", "cost"),
    ("lambda", "robust"),
    ("a1", "robust"),
    ("a2", "robust"),
    ("rho", "solver"),
    ("alpha", "solver"),
    ("state_bound", "solver"),
    ("x0", "solver"),
    ("dt", "solver"),
    ("horizon", "solver"),
    ("paths", "solver"),
    ("seed", "solver"),
];

const DYNAMICS: [&str; 4] = ["A", "B", "C", "D"];
const COST: [&str; 5] = ["L", "S", "R", "M", "N"];

/// Monte-Carlo settings read from `[solver]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub dt: f64,
    /// `None` selects the default `ln(1e4)/rho`.
    pub horizon: Option<f64>,
    pub paths: usize,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { dt: 1e-3, horizon: None, paths: 10_000, seed: 0 }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    /// Mixing weight for two-point validation and reporting.
    pub lambda: f64,
    pub x0: f64,
    pub sim: SimSettings,
    /// The table the config was built from, after overrides.
    pub table: Table,
}

impl RunConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let table: Table = src.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: Table) -> Result<Self> {
        let robust = section(&table, "robust", false)?;
        let solver = section(&table, "solver", true)?;
        let family_kind = match robust.and_then(|r| r.get("family")) {
            None => "single".to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => return Err(Error::Config(format!("robust.family: expected a string, got {}", other.type_str()))),
        };

        let rho = req_f64(solver.unwrap(), "solver", "rho")?;
        let alpha = req_f64(solver.unwrap(), "solver", "alpha")?;
        let solver = solver.unwrap();
        let state_bound = opt_f64(solver, "solver", "state_bound")?.unwrap_or(5.0);
        let x0 = opt_f64(solver, "solver", "x0")?.unwrap_or(1.0);
        let defaults = SimSettings::default();
        let sim = SimSettings {
            dt: opt_f64(solver, "solver", "dt")?.unwrap_or(defaults.dt),
            horizon: opt_f64(solver, "solver", "horizon")?,
            paths: match opt_int(solver, "solver", "paths")? {
                Some(n) if n >= 1 => n as usize,
                Some(n) => return Err(Error::Config(format!("solver.paths: must be >= 1, got {n}"))),
                None => defaults.paths,
            },
            seed: match opt_int(solver, "solver", "seed")? {
                Some(n) if n >= 0 => n as u64,
                Some(n) => return Err(Error::Config(format!("solver.seed: must be >= 0, got {n}"))),
                None => defaults.seed,
            },
        };

        let fields = coefficient_fields(&table)?;
        let mut lambda = 1.0;
        let family = match family_kind.as_str() {
            "single" => {
                let v = scalars(&fields, "single")?;
                CoefficientFamily::Single(ThetaCoefficients::from_array(v)?)
            }
            "two_point" => {
                let mut t1 = [0.0; 9];
                let mut t2 = [0.0; 9];
                for (i, (name, value)) in fields.iter().enumerate() {
                    match value.as_slice() {
                        [v] => {
                            t1[i] = *v;
                            t2[i] = *v;
                        }
                        [v1, v2] => {
                            t1[i] = *v1;
                            t2[i] = *v2;
                        }
                        _ => return Err(field_error(name, "two_point expects a scalar or a two-element list")),
                    }
                }
                lambda = opt_f64(robust.unwrap(), "robust", "lambda")?.unwrap_or(1.0);
                let t1 = ThetaCoefficients::from_array(t1).map_err(|e| e.in_scenario("theta1"))?;
                let t2 = ThetaCoefficients::from_array(t2).map_err(|e| e.in_scenario("theta2"))?;
                CoefficientFamily::TwoPoint { theta1: t1, theta2: t2 }
            }
            "uniform" => {
                let robust = robust.unwrap();
                let a1 = req_f64(robust, "robust", "a1")?;
                let a2 = req_f64(robust, "robust", "a2")?;
                let polys: Vec<Poly> = fields
                    .iter()
                    .map(|(name, v)| {
                        Poly::new(v.clone())
                            .ok_or_else(|| field_error(name, &format!("polynomial degree must be <= {MAX_DEGREE}")))
                    })
                    .collect::<Result<_>>()?;
                let [a, b, c, d, l, s, r, m, n]: [Poly; 9] = polys.try_into().expect("nine fields");
                CoefficientFamily::UniformPoly(UniformFamily::new(CoeffPolys { a, b, c, d, l, s, r, m, n }, a1, a2)?)
            }
            other => {
                return Err(Error::Config(format!(
                    "robust.family: unknown family {other:?} (expected single, two_point or uniform)"
                )))
            }
        };
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter { name: "lambda", reason: format!("must lie in [0, 1], got {lambda}") });
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter { name: "x0", reason: format!("not finite ({x0})") });
        }
        if !(sim.dt.is_finite() && sim.dt > 0.0) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("must be > 0, got {}", sim.dt) });
        }
        if let Some(h) = sim.horizon {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParameter { name: "horizon", reason: format!("must be finite and > 0, got {h}") });
            }
        }
        let problem = Problem::new(family, rho, alpha, state_bound)?;
        Ok(RunConfig { problem, lambda, x0, sim, table })
    }

    /// Returns a copy with `param` set to `value`. For two-point
    /// coefficient fields the value applies to both scenarios.
    pub fn with_override(&self, param: &str, value: f64) -> Result<Self> {
        Self::from_table(override_table(&self.table, param, value)?)
    }

    /// Simulation horizon, defaulting to `ln(1e4)/rho`.
    pub fn horizon(&self) -> f64 {
        self.sim.horizon.unwrap_or_else(|| default_horizon(self.problem.rho))
    }
}

/// `ln(1e4)/rho`, which truncates the discount tail at `1e-4`.
pub fn default_horizon(rho: f64) -> f64 {
    1e4f64.ln() / rho
}

/// Writes `param = value` into the section that owns it.
pub fn override_table(table: &Table, param: &str, value: f64) -> Result<Table> {
    let Some((_, sec)) = OVERRIDABLE_PARAMS.iter().find(|(p, _)| *p == param) else {
        let known: Vec<&str> = OVERRIDABLE_PARAMS.iter().map(|(p, _)| *p).collect();
        return Err(Error::Config(format!("unknown parameter {param:?} (known: {})", known.join(", "))));
    };
    let mut table = table.clone();
    let entry = table.entry(sec.to_string()).or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(section) = entry else {
        return Err(Error::Config(format!("{sec}: expected a table")));
    };
    let v = match param {
        "paths" | "seed" => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(Error::Config(format!("{sec}.{param}: expected a nonnegative integer, got {value}")));
            }
            Value::Integer(value as i64)
        }
        _ => Value::Float(value),
    };
    section.insert(param.to_string(), v);
    Ok(table)
}

fn section<'a>(table: &'a Table, name: &str, required: bool) -> Result<Option<&'a Table>> {
    match table.get(name) {
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(Error::Config(format!("[{name}] must be a table"))),
        None if required => Err(Error::Config(format!("missing section [{name}]"))),
        None => Ok(None),
    }
}

fn field_error(name: &'static str, reason: &str) -> Error {
    Error::InvalidCoefficient { field: name, reason: reason.to_string() }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn req_f64(t: &Table, sec: &str, key: &str) -> Result<f64> {
    opt_f64(t, sec, key)?.ok_or_else(|| Error::Config(format!("{sec}.{key}: missing")))
}

fn opt_f64(t: &Table, sec: &str, key: &str) -> Result<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => number(v)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{sec}.{key}: expected a number, got {}", v.type_str()))),
    }
}

fn opt_int(t: &Table, sec: &str, key: &str) -> Result<Option<i64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) => Ok(Some(*i)),
        Some(v) => Err(Error::Config(format!("{sec}.{key}: expected an integer, got {}", v.type_str()))),
    }
}

/// The nine coefficient fields in `A..N` order, each as a list of numbers.
fn coefficient_fields(table: &Table) -> Result<Vec<(&'static str, Vec<f64>)>> {
    let mut out = Vec::with_capacity(9);
    for (sec, names) in [("dynamics", &DYNAMICS[..]), ("cost", &COST[..])] {
        let t = section(table, sec, true)?.unwrap();
        for key in t.keys() {
            if !names.contains(&key.as_str()) {
                return Err(Error::Config(format!("{sec}.{key}: unknown field (expected one of {})", names.join(", "))));
            }
        }
        for &name in names {
            let v = match t.get(name) {
                None if matches!(name, "M" | "N" | "S" | "C") => vec![0.0],
                None => return Err(field_error(name, &format!("missing from [{sec}]"))),
                Some(Value::Array(items)) => {
                    let vals: Option<Vec<f64>> = items.iter().map(number).collect();
                    match vals {
                        Some(v) if !v.is_empty() => v,
                        _ => return Err(field_error(name, "expected a non-empty list of numbers")),
                    }
                }
                Some(v) => vec![number(v).ok_or_else(|| field_error(name, &format!("expected a number, got {}", v.type_str())))?],
            };
            out.push((name, v));
        }
    }
    Ok(out)
}

fn scalars(fields: &[(&'static str, Vec<f64>)], family: &str) -> Result<[f64; 9]> {
    let mut out = [0.0; 9];
    for (i, (name, v)) in fields.iter().enumerate() {
        match v.as_slice() {
            [x] => out[i] = *x,
            _ => return Err(field_error(name, &format!("{family} expects a scalar"))),
        }
    }
    Ok(out)
}
