//! Euler–Maruyama simulation of the classical and exploratory state
//! equations and Monte-Carlo estimates of discounted costs.
//!
//! Path `i` draws its Brownian increments from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`, and per-path
//! results are reduced in path order by pairwise summation, so estimates do
//! not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{positive, ThetaCoefficients};
use crate::numerics::{fit_line, mean_and_std_error, pairwise_sum};
use crate::policy::{GaussianPolicy, VARIANCE_FLOOR};

/// States beyond this magnitude count as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;
/// Largest tolerated fraction of divergent paths.
pub const MAX_DIVERGENT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    /// Simulated horizon, `n_steps · dt`.
    pub horizon: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SimConfig {
    /// The step count is `⌈horizon/dt⌉`, so the simulated horizon is the
    /// requested one rounded up to a whole number of steps.
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Result<Self> {
        positive("dt", dt)?;
        positive("horizon", horizon)?;
        if n_paths == 0 {
            return Err(Error::InvalidParameter { name: "paths", reason: "must be >= 1".into() });
        }
        let n_steps = ((horizon / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(SimConfig { dt, horizon: n_steps as f64 * dt, n_steps, n_paths, seed, workers: None })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers.max(1));
        self
    }

    /// `e^{−ρT}`, the discount mass dropped by truncating at the horizon.
    pub fn truncation_note(&self, rho: f64) -> f64 {
        (-rho * self.horizon).exp()
    }

    fn path_rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }

    fn run<T: Send>(&self, per_path: impl Fn(usize, &mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
        let job = || (0..self.n_paths).into_par_iter().map(|i| per_path(i, &mut self.path_rng(i))).collect();
        match self.workers {
            Some(w) => rayon::ThreadPoolBuilder::new().num_threads(w).build().expect("thread pool").install(job),
            None => job(),
        }
    }

    /// Per-step weights `e^{−ρ t_k}(1 − e^{−ρ dt})/ρ`, exact for a
    /// piecewise-constant integrand.
    fn discount_weights(&self, rho: f64) -> Vec<f64> {
        let decay = (-rho * self.dt).exp();
        let mut w = -(-rho * self.dt).exp_m1() / rho;
        let mut out = Vec::with_capacity(self.n_steps);
        for _ in 0..self.n_steps {
            out.push(w);
            w *= decay;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Paths that stayed bounded and enter the estimate.
    pub n_paths: usize,
    pub n_diverged: usize,
    pub dt: f64,
    pub horizon: f64,
    /// False when more than 0.1% of the paths diverged.
    pub valid: bool,
}

impl MCEstimate {
    fn from_paths(results: &[Option<f64>], cfg: &SimConfig) -> Self {
        let kept: Vec<f64> = results.iter().flatten().copied().collect();
        let n_diverged = results.len() - kept.len();
        let (mean, std_error) = mean_and_std_error(&kept);
        MCEstimate {
            mean,
            std_error,
            n_paths: kept.len(),
            n_diverged,
            dt: cfg.dt,
            horizon: cfg.horizon,
            valid: !kept.is_empty() && (n_diverged as f64) <= MAX_DIVERGENT_FRACTION * results.len() as f64,
        }
    }

    /// `|mean − target| ≤ k · std_error`, with a round-off floor for
    /// deterministic integrands.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-12 * (1.0 + target.abs())
    }
}

/// One exploratory Euler–Maruyama step: drift `A x + B μ(x)` and diffusion
/// `√((C x + D μ(x))² + D² σ²)`.
pub fn step_exploratory(coeffs: &ThetaCoefficients, p: &GaussianPolicy, x: f64, dt: f64, dw: f64) -> f64 {
    let mu = p.mean(x);
    let vol = coeffs.c * x + coeffs.d * mu;
    let sd = (vol * vol + coeffs.d * coeffs.d * p.variance).sqrt();
    x + (coeffs.a * x + coeffs.b * mu) * dt + sd * dw
}

/// One classical Euler–Maruyama step under action `u`.
pub fn step_classical(coeffs: &ThetaCoefficients, u: f64, x: f64, dt: f64, dw: f64) -> f64 {
    x + (coeffs.a * x + coeffs.b * u) * dt + (coeffs.c * x + coeffs.d * u) * dw
}

/// Closed-form `E_π f(x, u) − α H(π)` for the Gaussian policy at `x`.
pub fn exploratory_running_cost(coeffs: &ThetaCoefficients, p: &GaussianPolicy, alpha: f64, x: f64) -> f64 {
    let mu = p.mean(x);
    let ThetaCoefficients { l, s, r, m, n, .. } = *coeffs;
    0.5 * l * x * x + s * x * mu + 0.5 * r * (mu * mu + p.variance) + m * x + n * mu - alpha * p.entropy()
}

pub fn classical_running_cost(coeffs: &ThetaCoefficients, x: f64, u: f64) -> f64 {
    let ThetaCoefficients { l, s, r, m, n, .. } = *coeffs;
    0.5 * l * x * x + s * x * u + 0.5 * r * u * u + m * x + n * u
}

fn check_state(x0: f64, rho: f64) -> Result<()> {
    if !x0.is_finite() {
        return Err(Error::NonFinite(x0));
    }
    positive("rho", rho)
}

fn dw_scale(cfg: &SimConfig) -> f64 {
    cfg.dt.sqrt()
}

/// Monte-Carlo estimate of the discounted exploratory cost
/// `E ∫₀ᵀ e^{−ρt} (f̃ − α H) dt` from `x0` by left-point quadrature.
pub fn estimate_cost_exploratory(
    coeffs: &ThetaCoefficients,
    p: &GaussianPolicy,
    x0: f64,
    rho: f64,
    alpha: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    estimate_cost_mixture(&[(*coeffs, *p)], x0, rho, alpha, cfg)
}

/// Exploratory cost when path `i` runs under `scenarios[i % len]`. With
/// equally weighted strata this estimates the scenario average.
pub fn estimate_cost_mixture(
    scenarios: &[(ThetaCoefficients, GaussianPolicy)],
    x0: f64,
    rho: f64,
    alpha: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    check_state(x0, rho)?;
    if scenarios.is_empty() {
        return Err(Error::InvalidParameter { name: "scenarios", reason: "empty list".into() });
    }
    let w = cfg.discount_weights(rho);
    let sq = dw_scale(cfg);
    let results = cfg.run(|i, rng| {
        let (coeffs, p) = &scenarios[i % scenarios.len()];
        let mut x = x0;
        let mut cost = 0.0;
        for wk in &w {
            cost += wk * exploratory_running_cost(coeffs, p, alpha, x);
            let z: f64 = rng.sample(StandardNormal);
            x = step_exploratory(coeffs, p, x, cfg.dt, sq * z);
            if !(x.abs() <= DIVERGENCE_BOUND) {
                return None;
            }
        }
        Some(cost)
    });
    Ok(MCEstimate::from_paths(&results, cfg))
}

/// Monte-Carlo estimate of the discounted classical cost under the linear
/// feedback `u = slope · x + intercept`.
pub fn estimate_cost_classical(
    coeffs: &ThetaCoefficients,
    feedback: (f64, f64),
    x0: f64,
    rho: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    check_state(x0, rho)?;
    let w = cfg.discount_weights(rho);
    let sq = dw_scale(cfg);
    let (slope, intercept) = feedback;
    let results = cfg.run(|_, rng| {
        let mut x = x0;
        let mut cost = 0.0;
        for wk in &w {
            let u = slope * x + intercept;
            cost += wk * classical_running_cost(coeffs, x, u);
            let z: f64 = rng.sample(StandardNormal);
            x = step_classical(coeffs, u, x, cfg.dt, sq * z);
            if !(x.abs() <= DIVERGENCE_BOUND) {
                return None;
            }
        }
        Some(cost)
    });
    Ok(MCEstimate::from_paths(&results, cfg))
}

/// Per-path difference of the exploratory cost under `p` and the classical
/// cost under `feedback`, driven by the same Brownian increments.
pub fn estimate_cost_difference(
    coeffs: &ThetaCoefficients,
    p: &GaussianPolicy,
    feedback: (f64, f64),
    x0: f64,
    rho: f64,
    alpha: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    check_state(x0, rho)?;
    let w = cfg.discount_weights(rho);
    let sq = dw_scale(cfg);
    let (slope, intercept) = feedback;
    let results = cfg.run(|_, rng| {
        let (mut xe, mut xc) = (x0, x0);
        let mut diff = 0.0;
        for wk in &w {
            let u = slope * xc + intercept;
            diff += wk * (exploratory_running_cost(coeffs, p, alpha, xe) - classical_running_cost(coeffs, xc, u));
            let dw = sq * rng.sample::<f64, _>(StandardNormal);
            xe = step_exploratory(coeffs, p, xe, cfg.dt, dw);
            xc = step_classical(coeffs, u, xc, cfg.dt, dw);
            if !(xe.abs() <= DIVERGENCE_BOUND && xc.abs() <= DIVERGENCE_BOUND) {
                return None;
            }
        }
        Some(diff)
    });
    Ok(MCEstimate::from_paths(&results, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// Sample `E X_t²` at `times`.
    pub second_moments: Vec<f64>,
    /// Least-squares slope of `ln E X_t²` over the second half of the
    /// horizon; NaN when every moment is zero.
    pub fitted_rate: f64,
    /// `ln((1 + a dt)² + c² dt)/dt` with `a = A + B·slope`, `c = C + D·slope`.
    pub analytic_rate: f64,
    /// `max_t E X_t² e^{c3 t}/x0²` with `c3 = −fitted_rate`, the smallest
    /// constant for which the exponential envelope holds on the samples.
    pub envelope_constant: f64,
    pub stable: bool,
    pub n_diverged: usize,
}

/// Moment samples per run.
const DECAY_SAMPLES: usize = 200;

/// Empirical second-moment decay of the closed loop from `x0`. The instance
/// must be homogeneous (zero mean intercept, no action noise in the state
/// equation) so that `x ≡ 0` is a solution.
pub fn check_moment_decay(coeffs: &ThetaCoefficients, p: &GaussianPolicy, x0: f64, cfg: &SimConfig) -> Result<DecayReport> {
    if !x0.is_finite() {
        return Err(Error::NonFinite(x0));
    }
    if p.mean_intercept != 0.0 || (coeffs.d != 0.0 && p.variance > VARIANCE_FLOOR) {
        return Err(Error::Precondition(
            "moment decay needs a homogeneous closed loop (zero mean intercept and D^2 sigma^2 = 0)".into(),
        ));
    }
    let stride = cfg.n_steps.div_ceil(DECAY_SAMPLES).max(1);
    let sample_steps: Vec<usize> = (0..=cfg.n_steps).step_by(stride).collect();
    let sq = dw_scale(cfg);
    let paths = cfg.run(|_, rng| {
        let mut out = Vec::with_capacity(sample_steps.len());
        let mut x = x0;
        let mut next = 0;
        for k in 0..=cfg.n_steps {
            if next < sample_steps.len() && sample_steps[next] == k {
                out.push(x * x);
                next += 1;
            }
            if k == cfg.n_steps {
                break;
            }
            let z: f64 = rng.sample(StandardNormal);
            x = step_exploratory(coeffs, p, x, cfg.dt, sq * z);
            if !(x.abs() <= DIVERGENCE_BOUND) {
                return None;
            }
        }
        Some(out)
    });
    let kept: Vec<&Vec<f64>> = paths.iter().flatten().collect();
    let n_diverged = paths.len() - kept.len();
    let times: Vec<f64> = sample_steps.iter().map(|&k| k as f64 * cfg.dt).collect();
    let second_moments: Vec<f64> = (0..times.len())
        .map(|j| {
            let col: Vec<f64> = kept.iter().map(|v| v[j]).collect();
            pairwise_sum(&col) / col.len().max(1) as f64
        })
        .collect();

    let a = coeffs.a + coeffs.b * p.mean_slope;
    let c = coeffs.c + coeffs.d * p.mean_slope;
    let analytic_rate = ((1.0 + a * cfg.dt).powi(2) + c * c * cfg.dt).ln() / cfg.dt;

    let half = cfg.horizon / 2.0;
    let (ft, fy): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&second_moments)
        .filter(|(t, m)| **t >= half && **m > 0.0)
        .map(|(t, m)| (*t, m.ln()))
        .unzip();
    let fitted_rate = if ft.len() >= 2 { fit_line(&ft, &fy).0 } else { f64::NAN };
    let trivial = second_moments.iter().all(|m| *m == 0.0);
    let envelope_constant = if trivial || x0 == 0.0 {
        0.0
    } else {
        times
            .iter()
            .zip(&second_moments)
            .map(|(t, m)| m * (-fitted_rate * t).exp() / (x0 * x0))
            .fold(0.0, f64::max)
    };
    let stable = trivial || (fitted_rate < 0.0 && n_diverged == 0);
    Ok(DecayReport { times, second_moments, fitted_rate, analytic_rate, envelope_constant, stable, n_diverged })
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub path_id: usize,
    pub x: f64,
    pub running_cost: f64,
}

/// Exploratory paths `0..n_dump` sampled every `stride` steps, using the same
/// per-path streams as the estimators.
pub fn dump_trajectories(
    coeffs: &ThetaCoefficients,
    p: &GaussianPolicy,
    x0: f64,
    alpha: f64,
    cfg: &SimConfig,
    n_dump: usize,
    stride: usize,
) -> Vec<TrajectoryRow> {
    let stride = stride.max(1);
    let sq = dw_scale(cfg);
    let mut rows = Vec::new();
    for path_id in 0..n_dump.min(cfg.n_paths) {
        let mut rng = cfg.path_rng(path_id);
        let mut x = x0;
        for k in 0..=cfg.n_steps {
            if k % stride == 0 || k == cfg.n_steps {
                rows.push(TrajectoryRow {
                    t: k as f64 * cfg.dt,
                    path_id,
                    x,
                    running_cost: exploratory_running_cost(coeffs, p, alpha, x),
                });
            }
            if k == cfg.n_steps || !(x.abs() <= DIVERGENCE_BOUND) {
                break;
            }
            let z: f64 = rng.sample(StandardNormal);
            x = step_exploratory(coeffs, p, x, cfg.dt, sq * z);
        }
    }
    rows
}
