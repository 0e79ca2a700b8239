//! Worst-case measure search and numerical checks of the robust theory:
//! minimax exchange, classical/exploratory solvability, exploration cost and
//! the vanishing-exploration limit.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{positive, CoefficientFamily, Problem, ThetaCoefficients, UniformFamily};
use crate::numerics::{composite_gauss_legendre, golden_section_max, linspace};
use crate::policy::{classical_feedback, gaussian_from_value, GaussianPolicy};
use crate::riccati::{solve_theta, Quadratic, ThetaValueFunction};
use crate::sde_sim::{estimate_cost_classical, estimate_cost_difference, MCEstimate, SimConfig};

/// Default number of candidates on the `a` grid.
pub const A_GRID_POINTS: usize = 101;
/// Width at which the golden-section refinement of `a*` stops.
pub const A_REFINE_WIDTH: f64 = 1e-8;
/// Candidates within this distance of the best value count as ties.
pub const ARGMAX_TIE_TOL: f64 = 1e-12;

const QUAD_PANELS: usize = 8;
const QUAD_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WorstCase {
    /// Only one scenario exists.
    Single,
    /// Two-point family, `λ* ∈ {0, 1}`.
    Lambda(f64),
    /// Uniform family, `θ ∼ U(0, a*)`.
    A(f64),
}

impl WorstCase {
    pub fn parameter(&self) -> f64 {
        match *self {
            WorstCase::Single => 1.0,
            WorstCase::Lambda(l) => l,
            WorstCase::A(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustSolution {
    pub worst_case: WorstCase,
    /// `V(x)` at the evaluated state.
    pub value: f64,
    pub x: f64,
    /// Scenario solutions: `θ ∈ {1, 2}` for the two-point family, the
    /// quadrature nodes on `[0, a*]` for the uniform family.
    pub per_theta: Vec<(f64, ThetaValueFunction)>,
    /// Every evaluated `(candidate, value)` pair in evaluation order.
    pub argmax_trace: Vec<(f64, f64)>,
}

/// `V(x) = max{v1(x), v2(x)}`; `λ* = 1` wins ties.
pub fn robust_value_two_point(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    rho: f64,
    alpha: f64,
    x: f64,
) -> Result<RobustSolution> {
    let v1 = solve_theta(t1, rho, alpha).map_err(|e| e.in_scenario("theta1"))?;
    let v2 = solve_theta(t2, rho, alpha).map_err(|e| e.in_scenario("theta2"))?;
    let (y1, y2) = (v1.value(x), v2.value(x));
    let (lambda, value) = if y1 >= y2 { (1.0, y1) } else { (0.0, y2) };
    Ok(RobustSolution {
        worst_case: WorstCase::Lambda(lambda),
        value,
        x,
        per_theta: vec![(1.0, v1), (2.0, v2)],
        argmax_trace: vec![(1.0, y1), (0.0, y2)],
    })
}

fn nodes_on(a: f64) -> (Vec<f64>, Vec<f64>) {
    composite_gauss_legendre(0.0, a, QUAD_PANELS, QUAD_ORDER)
}

fn solve_nodes(family: &UniformFamily, a: f64, rho: f64, alpha: f64) -> Result<Vec<(f64, f64, ThetaValueFunction)>> {
    let (nodes, weights) = nodes_on(a);
    nodes
        .into_iter()
        .zip(weights)
        .map(|(theta, w)| {
            let c = family.polys.eval_unchecked(theta);
            let v = solve_theta(&c, rho, alpha).map_err(|e| Error::Node { theta, source: Box::new(e) })?;
            Ok((theta, w / a, v))
        })
        .collect()
}

/// `(1/a) ∫₀ᵃ g(θ) dθ` for any per-node quantity.
fn uniform_average(
    family: &UniformFamily,
    a: f64,
    rho: f64,
    alpha: f64,
    g: impl Fn(&ThetaCoefficients, &ThetaValueFunction) -> f64,
) -> Result<f64> {
    Ok(solve_nodes(family, a, rho, alpha)?
        .iter()
        .map(|(theta, w, v)| w * g(&family.polys.eval_unchecked(*theta), v))
        .sum())
}

/// `V(x) = sup_a (1/a) ∫₀ᵃ v_θ(x) dθ` over `a ∈ [a1, a2]`: an equispaced
/// grid followed by a golden-section refinement around the best grid point.
/// The smallest `a` wins ties.
pub fn robust_value_uniform(
    family: &UniformFamily,
    rho: f64,
    alpha: f64,
    x: f64,
    a_grid_size: usize,
) -> Result<RobustSolution> {
    robust_value_uniform_with(family, rho, alpha, a_grid_size, |_, v| v.value(x), x)
}

fn robust_value_uniform_with(
    family: &UniformFamily,
    rho: f64,
    alpha: f64,
    a_grid_size: usize,
    g: impl Fn(&ThetaCoefficients, &ThetaValueFunction) -> f64 + Copy,
    x: f64,
) -> Result<RobustSolution> {
    positive("rho", rho)?;
    positive("alpha", alpha)?;
    let grid = linspace(family.a1, family.a2, a_grid_size.max(2));
    let mut trace = Vec::with_capacity(grid.len() + 64);
    for &a in &grid {
        trace.push((a, uniform_average(family, a, rho, alpha, g)?));
    }
    let top = trace.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let best_idx = trace.iter().position(|t| t.1 >= top - ARGMAX_TIE_TOL).expect("non-empty grid");
    let (mut a_star, mut value) = trace[best_idx];

    let lo = grid[best_idx.saturating_sub(1)];
    let hi = grid[(best_idx + 1).min(grid.len() - 1)];
    let mut err = None;
    let refine = golden_section_max(
        |a| match uniform_average(family, a, rho, alpha, g) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        A_REFINE_WIDTH,
    );
    if let Some(e) = err {
        return Err(e);
    }
    for &(a, v) in &refine {
        if v > value + ARGMAX_TIE_TOL {
            a_star = a;
            value = v;
        }
    }
    trace.extend(refine);

    let per_theta = solve_nodes(family, a_star, rho, alpha)?.into_iter().map(|(t, _, v)| (t, v)).collect();
    Ok(RobustSolution { worst_case: WorstCase::A(a_star), value, x, per_theta, argmax_trace: trace })
}

/// Dispatches on the problem's family.
pub fn robust_value(problem: &Problem, x: f64) -> Result<RobustSolution> {
    match &problem.family {
        CoefficientFamily::Single(c) => {
            let v = solve_theta(c, problem.rho, problem.alpha)?;
            let value = v.value(x);
            Ok(RobustSolution {
                worst_case: WorstCase::Single,
                value,
                x,
                per_theta: vec![(1.0, v)],
                argmax_trace: vec![(1.0, value)],
            })
        }
        CoefficientFamily::TwoPoint { theta1, theta2 } => {
            robust_value_two_point(theta1, theta2, problem.rho, problem.alpha, x)
        }
        CoefficientFamily::UniformPoly(u) => robust_value_uniform(u, problem.rho, problem.alpha, x, A_GRID_POINTS),
    }
}

// ---------------------------------------------------------------------------
// Minimax exchange

/// Expected Hamiltonian `E_π[f + V′ b + ½ V″ σ²] − α H(π)` for a Gaussian
/// action `N(mean, variance)` at state `x`.
pub fn gaussian_hamiltonian(coeffs: &ThetaCoefficients, v: &Quadratic, alpha: f64, x: f64, mean: f64, variance: f64) -> f64 {
    let ThetaCoefficients { a, b, c, d, l, s, r, m, n } = *coeffs;
    let second = mean * mean + variance;
    let f = 0.5 * l * x * x + s * x * mean + 0.5 * r * second + m * x + n * mean;
    let drift = a * x + b * mean;
    let vol = c * x + d * mean;
    let diffusion = vol * vol + d * d * variance;
    let entropy = 0.5 * (2.0 * PI * E * variance).ln();
    f + v.d1(x) * drift + 0.5 * v.d2() * diffusion - alpha * entropy
}

/// Points per axis of the policy lattice.
pub const LATTICE_POINTS: usize = 41;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeGap {
    pub inf_sup: f64,
    pub sup_inf: f64,
    /// `inf_sup − sup_inf`.
    pub gap: f64,
    /// Lattice policy attaining `inf_sup`.
    pub saddle: (f64, f64),
    /// Lattice rows whose maximum over the λ grid sits at `λ ∈ {0, 1}`.
    pub endpoint_rows: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxReport {
    pub coarse: LatticeGap,
    pub refined: LatticeGap,
    pub lambdas: Vec<f64>,
}

impl MinimaxReport {
    pub fn lambda_affine(&self) -> bool {
        self.coarse.endpoint_rows == self.coarse.rows && self.refined.endpoint_rows == self.refined.rows
    }
}

/// `λ ∈ {0, 0.05, …, 1}`.
pub fn lambda_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// `inf_π sup_λ Φ − sup_λ inf_π Φ` over the λ grid and the given policies,
/// with `Φ(λ, π) = λ h1(π) + (1 − λ) h2(π)`.
pub fn minimax_gap(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    rho: f64,
    alpha: f64,
    x: f64,
    policy_grid: &[GaussianPolicy],
) -> Result<LatticeGap> {
    if policy_grid.is_empty() {
        return Err(Error::EmptyPolicyGrid);
    }
    let v = worst_case_value(t1, t2, rho, alpha, x)?;
    Ok(lattice_gap(t1, t2, &v, alpha, x, policy_grid.iter().map(|p| (p.mean(x), p.variance))))
}

fn worst_case_value(t1: &ThetaCoefficients, t2: &ThetaCoefficients, rho: f64, alpha: f64, x: f64) -> Result<Quadratic> {
    let sol = robust_value_two_point(t1, t2, rho, alpha, x)?;
    let idx = if sol.worst_case == WorstCase::Lambda(1.0) { 0 } else { 1 };
    Ok(sol.per_theta[idx].1.quadratic())
}

fn lattice_gap(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    v: &Quadratic,
    alpha: f64,
    x: f64,
    policies: impl Iterator<Item = (f64, f64)>,
) -> LatticeGap {
    let lambdas = lambda_grid();
    let mut inner_min = vec![f64::INFINITY; lambdas.len()];
    let mut inf_sup = f64::INFINITY;
    let mut saddle = (f64::NAN, f64::NAN);
    let mut endpoint_rows = 0;
    let mut rows = 0;
    for (mean, var) in policies {
        let h1 = gaussian_hamiltonian(t1, v, alpha, x, mean, var);
        let h2 = gaussian_hamiltonian(t2, v, alpha, x, mean, var);
        let mut row_max = f64::NEG_INFINITY;
        let mut row_arg = 0;
        for (j, &lam) in lambdas.iter().enumerate() {
            let phi = h2 + lam * (h1 - h2);
            if phi > row_max {
                row_max = phi;
                row_arg = j;
            }
            inner_min[j] = inner_min[j].min(phi);
        }
        let end_max = h1.max(h2);
        if row_arg == 0 || row_arg == lambdas.len() - 1 || row_max <= end_max + 1e-12 * (1.0 + end_max.abs()) {
            endpoint_rows += 1;
        }
        rows += 1;
        if row_max < inf_sup {
            inf_sup = row_max;
            saddle = (mean, var);
        }
    }
    let sup_inf = inner_min.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    LatticeGap { inf_sup, sup_inf, gap: inf_sup - sup_inf, saddle, endpoint_rows, rows }
}

fn lattice(mean_lo: f64, mean_hi: f64, lvar_lo: f64, lvar_hi: f64) -> Vec<(f64, f64)> {
    let means = linspace(mean_lo, mean_hi, LATTICE_POINTS);
    let lvars = linspace(lvar_lo, lvar_hi, LATTICE_POINTS);
    means.iter().flat_map(|&m| lvars.iter().map(move |&lv| (m, lv.exp()))).collect()
}

/// Minimax gap on a `41 × 41` lattice of (mean, log-variance) spanning the
/// two per-scenario optimal policies with margin, and again on a refined
/// `41 × 41` lattice centred on the coarse saddle with a window of two coarse
/// spacings per side.
pub fn minimax_check(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    rho: f64,
    alpha: f64,
    x: f64,
) -> Result<MinimaxReport> {
    let v = worst_case_value(t1, t2, rho, alpha, x)?;
    let p1 = gaussian_from_value(t1, &solve_theta(t1, rho, alpha)?.quadratic(), alpha)?;
    let p2 = gaussian_from_value(t2, &solve_theta(t2, rho, alpha)?.quadratic(), alpha)?;
    let (m1, m2) = (p1.mean(x), p2.mean(x));
    let (l1, l2) = (p1.variance.ln(), p2.variance.ln());
    let mspan = (m1 - m2).abs().max(0.1);
    let lspan = (l1 - l2).abs().max(0.5);
    let (mlo, mhi) = (m1.min(m2) - 0.5 * mspan, m1.max(m2) + 0.5 * mspan);
    let (llo, lhi) = (l1.min(l2) - 0.5 * lspan, l1.max(l2) + 0.5 * lspan);
    let coarse = lattice_gap(t1, t2, &v, alpha, x, lattice(mlo, mhi, llo, lhi).into_iter());

    let step_m = (mhi - mlo) / (LATTICE_POINTS - 1) as f64;
    let step_l = (lhi - llo) / (LATTICE_POINTS - 1) as f64;
    let (cm, cv) = coarse.saddle;
    let cl = cv.ln();
    let refined_pts = lattice(cm - 2.0 * step_m, cm + 2.0 * step_m, cl - 2.0 * step_l, cl + 2.0 * step_l);
    let refined = lattice_gap(t1, t2, &v, alpha, x, refined_pts.into_iter());
    Ok(MinimaxReport { coarse, refined, lambdas: lambda_grid() })
}

// ---------------------------------------------------------------------------
// Exploration cost

/// `α (ln(2πeσ²) + 1)/(2ρ)`, the offset between the exploratory constant and
/// the classical one.
pub fn classical_offset(alpha: f64, rho: f64, variance: f64) -> f64 {
    alpha * ((2.0 * PI * E * variance).ln() + 1.0) / (2.0 * rho)
}

/// `α/(2ρ) · ln(2πe σ²)`, the discounted entropy integral term.
pub fn entropy_term(alpha: f64, rho: f64, variance: f64) -> f64 {
    alpha * (2.0 * PI * E * variance).ln() / (2.0 * rho)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationCostReport {
    pub x: f64,
    /// `V(x) + entropy term − V^cl(x)` from the displayed constants.
    pub cost: f64,
    /// `−α/(2ρ)`.
    pub expected: f64,
    pub deviation: f64,
    /// The same gap computed from the HJB-consistent constant and the
    /// classical value `−(N + B k1)²/(2ρq) + ½ k2 x² + k1 x`.
    pub cost_consistent: f64,
    pub exploratory_value: f64,
    pub classical_value: f64,
    pub worst_case: WorstCase,
    /// Worst case of the classical problem on its own.
    pub classical_worst_case: WorstCase,
    /// Set when the two worst cases differ.
    pub flagged: bool,
}

impl ExplorationCostReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.deviation.abs() < tol
    }
}

fn classical_value_true(v: &ThetaValueFunction, c: &ThetaCoefficients, rho: f64, x: f64) -> f64 {
    let lin = c.n + c.b * v.k1;
    0.5 * v.k2 * x * x + v.k1 * x - lin * lin / (2.0 * rho * v.control_weight)
}

/// Exploration cost at `x` under the exploratory worst-case measure.
pub fn exploration_cost(problem: &Problem, x: f64) -> Result<ExplorationCostReport> {
    let (rho, alpha) = (problem.rho, problem.alpha);
    // (exploratory displayed, entropy term, classical per statement (b), consistent, classical true)
    let parts = |c: &ThetaCoefficients, v: &ThetaValueFunction| {
        let disp = v.displayed_quadratic().eval(x);
        let ent = entropy_term(alpha, rho, v.variance);
        let cl = disp + classical_offset(alpha, rho, v.variance);
        [disp, ent, cl, v.value(x), classical_value_true(v, c, rho, x)]
    };
    let combine = |p: [f64; 5], worst: WorstCase, classical_worst: WorstCase, classical_value: f64| {
        let cost = p[0] + p[1] - p[2];
        let expected = -alpha / (2.0 * rho);
        ExplorationCostReport {
            x,
            cost,
            expected,
            deviation: cost - expected,
            cost_consistent: p[3] + p[1] - p[4],
            exploratory_value: p[0],
            classical_value,
            worst_case: worst,
            classical_worst_case: classical_worst,
            flagged: worst != classical_worst,
        }
    };
    match &problem.family {
        CoefficientFamily::Single(c) => {
            let v = solve_theta(c, rho, alpha)?;
            let p = parts(c, &v);
            Ok(combine(p, WorstCase::Single, WorstCase::Single, p[2]))
        }
        CoefficientFamily::TwoPoint { theta1, theta2 } => {
            let sol = robust_value_two_point(theta1, theta2, rho, alpha, x)?;
            let pa = parts(theta1, &sol.per_theta[0].1);
            let pb = parts(theta2, &sol.per_theta[1].1);
            let (p, worst) = if sol.worst_case == WorstCase::Lambda(1.0) { (pa, 1.0) } else { (pb, 0.0) };
            let classical_worst = if pa[2] >= pb[2] { 1.0 } else { 0.0 };
            Ok(combine(p, WorstCase::Lambda(worst), WorstCase::Lambda(classical_worst), pa[2].max(pb[2])))
        }
        CoefficientFamily::UniformPoly(u) => {
            let sol = robust_value_uniform(u, rho, alpha, x, A_GRID_POINTS)?;
            let a = sol.worst_case.parameter();
            let mut p = [0.0; 5];
            for (theta, w, v) in solve_nodes(u, a, rho, alpha)? {
                let q = parts(&u.polys.eval_unchecked(theta), &v);
                for k in 0..5 {
                    p[k] += w * q[k];
                }
            }
            let cl = robust_value_uniform_with(
                u,
                rho,
                alpha,
                A_GRID_POINTS,
                |_, v| v.displayed_quadratic().eval(x) + classical_offset(alpha, rho, v.variance),
                x,
            )?;
            Ok(combine(p, sol.worst_case, cl.worst_case, cl.value))
        }
    }
}

/// Monte-Carlo counterpart for one scenario: the paired difference between
/// exploratory and classical path costs plus the entropy term, truncated at
/// the simulation horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationCostMc {
    pub difference: MCEstimate,
    pub entropy_term: f64,
    /// `difference.mean + entropy_term`.
    pub cost: f64,
    pub expected: f64,
    pub within_3se: bool,
}

pub fn exploration_cost_mc(c: &ThetaCoefficients, rho: f64, alpha: f64, x: f64, cfg: &SimConfig) -> Result<ExplorationCostMc> {
    let v = solve_theta(c, rho, alpha)?;
    let p = gaussian_from_value(c, &v.quadratic(), alpha)?;
    let feedback = classical_feedback(c, &v.quadratic())?;
    let difference = estimate_cost_difference(c, &p, feedback, x, rho, alpha, cfg)?;
    let entropy = entropy_term(alpha, rho, v.variance) * (1.0 - cfg.truncation_note(rho));
    let cost = difference.mean + entropy;
    let expected = -alpha / (2.0 * rho);
    let within_3se = difference.valid && (cost - expected).abs() <= 3.0 * difference.std_error + 1e-12;
    Ok(ExplorationCostMc { difference, entropy_term: entropy, cost, expected, within_3se })
}

// ---------------------------------------------------------------------------
// Solvability equivalence

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub slope_gap: f64,
    pub intercept_gap: f64,
    /// `v(x)` with the displayed constant plus `α(ln(2πeσ²) + 1)/(2ρ)`.
    pub statement_b_value: f64,
    /// `½ k2 x² + k1 x − (N + B k1)²/(2ρq)`.
    pub classical_closed_form: f64,
    pub mc: MCEstimate,
    pub means_identical: bool,
    pub mc_within_3se: bool,
}

impl SolvabilityReport {
    pub fn passed(&self) -> bool {
        self.means_identical && self.mc_within_3se
    }
}

pub fn solvability_equivalence_check(
    c: &ThetaCoefficients,
    rho: f64,
    alpha: f64,
    x: f64,
    cfg: &SimConfig,
) -> Result<SolvabilityReport> {
    let v = solve_theta(c, rho, alpha)?;
    let p = gaussian_from_value(c, &v.quadratic(), alpha)?;
    let (slope, intercept) = classical_feedback(c, &v.quadratic())?;
    let slope_gap = (slope - p.mean_slope).abs();
    let intercept_gap = (intercept - p.mean_intercept).abs();
    let statement_b_value = v.displayed_quadratic().eval(x) + classical_offset(alpha, rho, v.variance);
    let mc = estimate_cost_classical(c, (slope, intercept), x, rho, cfg)?;
    Ok(SolvabilityReport {
        slope_gap,
        intercept_gap,
        statement_b_value,
        classical_closed_form: classical_value_true(&v, c, rho, x),
        means_identical: slope_gap <= 1e-14 && intercept_gap <= 1e-14,
        mc_within_3se: mc.valid && mc.within(statement_b_value, 3.0),
        mc,
    })
}

// ---------------------------------------------------------------------------
// Vanishing exploration

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaLimitReport {
    pub alphas: Vec<f64>,
    pub mean_slopes: Vec<f64>,
    pub mean_intercepts: Vec<f64>,
    pub variance_ratios: Vec<f64>,
    pub k0: Vec<f64>,
    pub k0_displayed: Vec<f64>,
    /// Max drift of the mean coefficients from their values at `alphas[0]`.
    pub mean_drift: f64,
    /// Max `|σ²/α − 1/(R + D² k2)|`.
    pub ratio_drift: f64,
    /// Max error of `k0_displayed(α) − k0_displayed(α₀)` against the
    /// `−α(ln(2πeα/q) + 1)/(2ρ)` law.
    pub offset_error_displayed: f64,
    /// The same for `k0` against `−α(ln(2πeα/q) − 1)/(2ρ)`.
    pub offset_error_consistent: f64,
}

impl AlphaLimitReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.mean_drift < tol && self.ratio_drift < tol && self.offset_error_displayed < tol && self.offset_error_consistent < tol
    }
}

pub fn alpha_limit_check(c: &ThetaCoefficients, rho: f64, alphas: &[f64]) -> Result<AlphaLimitReport> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter { name: "alpha", reason: "empty list".into() });
    }
    let sols: Vec<ThetaValueFunction> = alphas.iter().map(|&a| solve_theta(c, rho, a)).collect::<Result<_>>()?;
    let policies: Vec<GaussianPolicy> = sols
        .iter()
        .zip(alphas)
        .map(|(v, &a)| gaussian_from_value(c, &v.quadratic(), a))
        .collect::<Result<_>>()?;
    let q = sols[0].control_weight;
    let offset = |a: f64, sign: f64| -a * ((2.0 * PI * E * a / q).ln() + sign) / (2.0 * rho);
    let mut report = AlphaLimitReport {
        alphas: alphas.to_vec(),
        mean_slopes: policies.iter().map(|p| p.mean_slope).collect(),
        mean_intercepts: policies.iter().map(|p| p.mean_intercept).collect(),
        variance_ratios: policies.iter().zip(alphas).map(|(p, a)| p.variance / a).collect(),
        k0: sols.iter().map(|v| v.k0).collect(),
        k0_displayed: sols.iter().map(|v| v.k0_displayed).collect(),
        mean_drift: 0.0,
        ratio_drift: 0.0,
        offset_error_displayed: 0.0,
        offset_error_consistent: 0.0,
    };
    for i in 0..alphas.len() {
        report.mean_drift = report
            .mean_drift
            .max((report.mean_slopes[i] - report.mean_slopes[0]).abs())
            .max((report.mean_intercepts[i] - report.mean_intercepts[0]).abs());
        report.ratio_drift = report.ratio_drift.max((report.variance_ratios[i] - 1.0 / q).abs());
        let (a, a0) = (alphas[i], alphas[0]);
        let disp = (report.k0_displayed[i] - report.k0_displayed[0]) - (offset(a, 1.0) - offset(a0, 1.0));
        let cons = (report.k0[i] - report.k0[0]) - (offset(a, -1.0) - offset(a0, -1.0));
        report.offset_error_displayed = report.offset_error_displayed.max(disp.abs());
        report.offset_error_consistent = report.offset_error_consistent.max(cons.abs());
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Report rows

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check_name: String,
    pub instance_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// `|lhs − rhs| ≤ tolerance`.
    pub fn close(check_name: &str, instance_id: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let gap = lhs - rhs;
        CheckRow {
            check_name: check_name.into(),
            instance_id: instance_id.into(),
            lhs,
            rhs,
            gap,
            tolerance,
            pass: gap.abs() <= tolerance,
        }
    }

    pub fn with_pass(check_name: &str, instance_id: &str, lhs: f64, rhs: f64, tolerance: f64, pass: bool) -> Self {
        CheckRow {
            check_name: check_name.into(),
            instance_id: instance_id.into(),
            lhs,
            rhs,
            gap: lhs - rhs,
            tolerance,
            pass,
        }
    }
}
