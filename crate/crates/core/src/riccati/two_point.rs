//! Two-scenario value functions `V(x1, x2) = ½ k21 x1² + ½ k22 x2² + k11 x1 + k12 x2 + k0`
//! under the mixture `λ δ_1 + (1 − λ) δ_2`.

use std::f64::consts::{E, PI};

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{positive, CouplingRatios, ThetaCoefficients};
use crate::numerics::{linspace, roots_from_samples};

/// Probe points per axis for HJB residuals.
pub const PROBE_POINTS: usize = 21;

/// Acceptance threshold on the seven algebraic equations.
pub const EQUATION_TOL: f64 = 1e-8;

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_MAX_HALVINGS: usize = 40;
const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
const NEWTON_STEP_TOL: f64 = 1e-14;
const RESIDUAL_TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoPointSource {
    ClosedForm,
    Numeric,
}

/// Intermediate quantities of the closed-form expressions. Entries whose
/// weight is zero at the given λ are not evaluated and hold NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormTerms {
    pub f1: f64,
    pub g1: f64,
    pub h1: f64,
    pub o1: f64,
    pub p1: f64,
    pub f2: f64,
    pub g2: f64,
    pub h2: f64,
    pub o2: f64,
    pub p2: f64,
    pub u1: f64,
    pub u2: f64,
    pub v1: f64,
    pub v2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointSolution {
    pub lambda: f64,
    pub k21: f64,
    pub k22: f64,
    pub k11: f64,
    pub k12: f64,
    pub k0: f64,
    /// `2 i + j`, with `i`, `j` the root index (0 minus, 1 plus) taken for
    /// `k21` and `k22`.
    pub branch_id: usize,
    /// Max |HJB residual| on the `21 × 21` probe grid.
    pub residual: f64,
    /// Max |residual| of the seven algebraic equations.
    pub equation_residual: f64,
    pub source: TwoPointSource,
    pub terms: Option<ClosedFormTerms>,
}

impl TwoPointSolution {
    pub fn unknowns(&self) -> [f64; 5] {
        [self.k21, self.k22, self.k11, self.k12, self.k0]
    }

    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        value_at(&self.unknowns(), x1, x2)
    }

    /// Gibbs policy restricted to `x1 = x2 = x`: returns
    /// `(mean_slope, mean_intercept, variance)`.
    pub fn diagonal_policy(&self, t1: &ThetaCoefficients, t2: &ThetaCoefficients, alpha: f64) -> Result<(f64, f64, f64)> {
        let mix = Mix::new(t1, t2, self.lambda);
        let q = mix.q(t1, t2, self.k21, self.k22);
        if !(q > 0.0) {
            return Err(Error::Domain(format!("R~ + D' Lambda K2 D = {q} <= 0")));
        }
        let c1 = mix.l * (t1.s + (t1.b + t1.c * t1.d) * self.k21);
        let c2 = mix.m * (t2.s + (t2.b + t2.c * t2.d) * self.k22);
        let z0 = mix.nt + mix.l * t1.b * self.k11 + mix.m * t2.b * self.k12;
        Ok((-(c1 + c2) / q, -z0 / q, alpha / q))
    }
}

fn value_at(z: &[f64; 5], x1: f64, x2: f64) -> f64 {
    0.5 * z[0] * x1 * x1 + 0.5 * z[1] * x2 * x2 + z[2] * x1 + z[3] * x2 + z[4]
}

/// Mixture weights and averaged cost terms.
#[derive(Clone, Copy)]
struct Mix {
    l: f64,
    m: f64,
    rt: f64,
    nt: f64,
}

impl Mix {
    fn new(t1: &ThetaCoefficients, t2: &ThetaCoefficients, lambda: f64) -> Self {
        let l = lambda;
        let m = 1.0 - lambda;
        Mix { l, m, rt: l * t1.r + m * t2.r, nt: l * t1.n + m * t2.n }
    }

    fn q(&self, t1: &ThetaCoefficients, t2: &ThetaCoefficients, k21: f64, k22: f64) -> f64 {
        self.rt + self.l * t1.d * t1.d * k21 + self.m * t2.d * t2.d * k22
    }
}

/// The seven algebraic equations in the unknowns `[k21, k22, k11, k12, k0]`,
/// ordered as the two curvature equations, the two cross-term equations,
/// the two linear-term equations and the constant-term equation.
pub fn appendix_equations(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    z: &[f64; 5],
) -> [f64; 7] {
    let [k21, k22, k11, k12, c] = *z;
    let mix = Mix::new(t1, t2, lambda);
    let Mix { l, m, rt, nt } = mix;
    let q = mix.q(t1, t2, k21, k22);
    let (c1d1, c2d2) = (t1.c * t1.d, t2.c * t2.d);
    let cross = t1.c * t2.c * t1.d * t2.d;
    let g1 = l * t1.a + 0.5 * l * t1.c * t1.c - 0.5 * rho;
    let g2 = m * t2.a + 0.5 * m * t2.c * t2.c - 0.5 * rho;
    let d1s = t1.d * t1.d;
    let d2s = t2.d * t2.d;

    let q1 = l * (2.0 * d1s * g1 - l * t1.b * t1.b - 2.0 * l * c1d1 * t1.b - l * c1d1 * c1d1) * k21 * k21
        + 2.0 * m * d2s * g1 * k21 * k22
        + (l * l * d1s * t1.l + 2.0 * rt * g1 - 2.0 * l * l * t1.s * t1.b - 2.0 * l * l * c1d1 * t1.s) * k21
        + l * m * d2s * t1.l * k22
        + l * rt * t1.l
        - l * l * t1.s * t1.s;
    let q2 = m * (2.0 * d2s * g2 - m * t2.b * t2.b - 2.0 * m * c2d2 * t2.b - m * c2d2 * c2d2) * k22 * k22
        + 2.0 * l * d1s * g2 * k21 * k22
        + (m * m * d2s * t2.l + 2.0 * rt * g2 - 2.0 * m * m * t2.s * t2.b - 2.0 * m * m * c2d2 * t2.s) * k22
        + l * m * d1s * t2.l * k21
        + m * rt * t2.l
        - m * m * t2.s * t2.s;

    let lm = l * m;
    let e1 = lm * (t1.s * t2.s + (t1.s * t2.b + c2d2 * t1.s) * k22 + (t1.b * t2.b + c2d2 * t1.b + cross) * k21 * k22);
    let e2 = lm * (t1.s * t2.s + (t2.s * t1.b + c1d1 * t2.s) * k21 + (t1.b * t2.b + c1d1 * t2.b + cross) * k21 * k22);

    let feedback = l * (t1.b + c1d1) * k21 + m * (t2.b + c2d2) * k22;
    let e5 = (2.0 * q * (rho - l * t1.a) + 2.0 * l * l * t1.b * t1.s + 2.0 * l * l * t1.b * t1.b * k21
        + 2.0 * l * l * c1d1 * t1.b * k21)
        * k11
        + 2.0 * lm * (t2.b * t1.s + t2.b * t1.b * k22 + c2d2 * t1.b * k22) * k12
        - l * (2.0 * q * t1.m - 2.0 * t1.s * nt - 2.0 * t1.n * feedback);
    let e6 = 2.0 * lm * (t1.b * t2.s + t2.b * t1.b * k21 + c1d1 * t2.b * k21) * k11
        + (2.0 * q * (rho - m * t2.a) + 2.0 * m * m * t2.b * t2.s + 2.0 * m * m * t2.b * t2.b * k22
            + 2.0 * m * m * c2d2 * t2.b * k22)
            * k12
        - m * (2.0 * q * t2.m - 2.0 * t2.s * nt - 2.0 * t2.n * feedback);

    let z0 = nt + l * t1.b * k11 + m * t2.b * k12;
    let e7 = 2.0 * q * rho * c + z0 * z0 + alpha * q * (2.0 * PI * alpha / q).ln();

    [q1, q2, e1, e2, e5, e6, e7]
}

/// `ρ V` minus the right-hand side of the two-scenario HJB equation at
/// `(x1, x2)`.
#[allow(clippy::too_many_arguments)]
pub fn two_point_hjb_residual(
    z: &[f64; 5],
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    let [k21, k22, k11, k12, _] = *z;
    let mix = Mix::new(t1, t2, lambda);
    let Mix { l, m, nt, .. } = mix;
    let q = mix.q(t1, t2, k21, k22);
    if !(q > 0.0) {
        return Err(Error::Domain(format!("R~ + D' Lambda K2 D = {q} <= 0")));
    }
    let vp1 = k21 * x1 + k11;
    let vp2 = k22 * x2 + k12;
    let zz = l * t1.s * x1 + m * t2.s * x2 + nt + l * t1.b * vp1 + m * t2.b * vp2
        + l * t1.d * t1.c * k21 * x1
        + m * t2.d * t2.c * k22 * x2;
    let rhs = 0.5 * (l * t1.l * x1 * x1 + m * t2.l * x2 * x2)
        + l * t1.m * x1
        + m * t2.m * x2
        + l * t1.a * x1 * vp1
        + m * t2.a * x2 * vp2
        + 0.5 * (l * t1.c * t1.c * k21 * x1 * x1 + m * t2.c * t2.c * k22 * x2 * x2)
        - 0.5 * alpha * (2.0 * PI * alpha / q).ln()
        - zz * zz / (2.0 * q);
    Ok(rho * value_at(z, x1, x2) - rhs)
}

/// Max |two_point_hjb_residual| on the `21 × 21` grid over `[−bound, bound]²`.
pub fn two_point_probe_residual(
    z: &[f64; 5],
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    bound: f64,
) -> Result<f64> {
    let grid = linspace(-bound, bound, PROBE_POINTS);
    let mut worst: f64 = 0.0;
    for &x1 in &grid {
        for &x2 in &grid {
            worst = worst.max(two_point_hjb_residual(z, t1, t2, lambda, rho, alpha, x1, x2)?.abs());
        }
    }
    Ok(worst)
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v.abs()) })
}

fn check_inputs(lambda: f64, rho: f64, alpha: f64, bound: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("must lie in [0, 1], got {lambda}") });
    }
    positive("rho", rho)?;
    positive("alpha", alpha)?;
    positive("state_bound", bound)
}

/// Closed-form curvature entry `√w (G ∓ √(G² − 4FH))/(2F)`.
fn closed_curvature(w: f64, f: f64, g: f64, h: f64, plus: bool, label: &str) -> Result<f64> {
    if f == 0.0 {
        return Err(Error::DegenerateQuadratic(format!("F{label} = 0")));
    }
    let disc = g * g - 4.0 * f * h;
    if disc < 0.0 || !disc.is_finite() {
        return Err(Error::NoRealSolution { discriminant: disc, context: format!("G{label}^2 - 4 F{label} H{label}") });
    }
    let sq = if plus { disc.sqrt() } else { -disc.sqrt() };
    Ok(w.sqrt() * (g + sq) / (2.0 * f))
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::SingularCouplingRatio(format!("{what} has a zero denominator")))
}

/// Evaluates the closed-form expressions with the given sign choice for
/// each curvature entry (`false` takes `G − √·`).
fn closed_form(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    signs: [bool; 2],
) -> Result<([f64; 5], ClosedFormTerms)> {
    let mix = Mix::new(t1, t2, lambda);
    let Mix { l, m, nt, .. } = mix;
    let cr = CouplingRatios::new(t1, t2);
    let nan = f64::NAN;
    let mut terms = ClosedFormTerms {
        f1: nan,
        g1: nan,
        h1: nan,
        o1: nan,
        p1: nan,
        f2: nan,
        g2: nan,
        h2: nan,
        o2: nan,
        p2: nan,
        u1: cr.u1.unwrap_or(nan),
        u2: cr.u2.unwrap_or(nan),
        v1: cr.v1.unwrap_or(nan),
        v2: cr.v2.unwrap_or(nan),
    };

    let mut k21 = 0.0;
    if l != 0.0 {
        let c1d1 = t1.c * t1.d;
        let g1w = l * t1.a + 0.5 * l * t1.c * t1.c - 0.5 * rho;
        let coupling = if m != 0.0 { 2.0 * m * t2.d * t2.d * g1w * need(cr.u2, "U2")? } else { 0.0 };
        terms.f1 = 2.0 * l * t1.d * t1.d * (l * t1.a - 0.5 * rho) - l * l * t1.b * t1.b - 2.0 * l * l * c1d1 * t1.b + coupling;
        terms.g1 = l * (l * t1.d * t1.d * t1.l - 2.0 * l * t1.s * t1.b - 2.0 * l * c1d1 * t1.s + 4.0 * t1.r * g1w);
        terms.h1 = -l * l * (t1.s * t1.s + t1.d * t1.d * t1.l * need(cr.v1, "V1")?);
        k21 = closed_curvature(l, terms.f1, terms.g1, terms.h1, signs[0], "1")?;
    }
    let mut k22 = 0.0;
    if m != 0.0 {
        let c2d2 = t2.c * t2.d;
        let g2w = m * t2.a + 0.5 * m * t2.c * t2.c - 0.5 * rho;
        let coupling = if l != 0.0 { 2.0 * l * t1.d * t1.d * g2w * need(cr.u1, "U1")? } else { 0.0 };
        terms.f2 = 2.0 * m * t2.d * t2.d * (m * t2.a - 0.5 * rho) - m * m * t2.b * t2.b - 2.0 * m * m * c2d2 * t2.b + coupling;
        terms.g2 = m * (m * t2.d * t2.d * t2.l - 2.0 * m * t2.s * t2.b - 2.0 * m * c2d2 * t2.s + 4.0 * t2.r * g2w);
        terms.h2 = -m * m * (t2.s * t2.s + t2.d * t2.d * t2.l * need(cr.v2, "V2")?);
        k22 = closed_curvature(m, terms.f2, terms.g2, terms.h2, signs[1], "2")?;
    }

    let q = mix.q(t1, t2, k21, k22);
    if !(q > 0.0) {
        return Err(Error::InadmissibleRoot(format!("R~ + D' Lambda K2 D = {q} <= 0")));
    }
    let feedback = l * (t1.b + t1.c * t1.d) * k21 + m * (t2.b + t2.c * t2.d) * k22;
    let mut k11 = 0.0;
    if l != 0.0 {
        terms.o1 = 2.0 * q * (rho - l * t1.a) + 2.0 * l * l * t1.b * (t1.s + k21 + t1.c * t1.d * k21);
        terms.p1 = 2.0 * q * t1.m - 2.0 * t1.s * nt - 2.0 * t1.n * feedback;
        if terms.o1 == 0.0 {
            return Err(Error::SingularLinearSystem("O1 = 0".into()));
        }
        k11 = l * terms.p1 / terms.o1;
    }
    let mut k12 = 0.0;
    if m != 0.0 {
        terms.o2 = 2.0 * q * (rho - m * t2.a) + 2.0 * m * m * t2.b * (t2.s + k22 + t2.c * t2.d * k22);
        terms.p2 = 2.0 * q * t2.m - 2.0 * t2.s * nt - 2.0 * t2.n * feedback;
        if terms.o2 == 0.0 {
            return Err(Error::SingularLinearSystem("O2 = 0".into()));
        }
        k12 = m * terms.p2 / terms.o2;
    }
    let bk = l * t1.b * k11 + m * t2.b * k12;
    let k0 = -(nt * nt + 2.0 * nt * bk + bk * bk) / (2.0 * q * rho) - 0.5 * alpha * (E * E * PI * alpha / q).ln();
    Ok(([k21, k22, k11, k12, k0], terms))
}

fn finish(
    z: [f64; 5],
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    bound: f64,
    branch_id: usize,
    source: TwoPointSource,
    terms: Option<ClosedFormTerms>,
) -> Result<TwoPointSolution> {
    let residual = two_point_probe_residual(&z, t1, t2, lambda, rho, alpha, bound)?;
    let equation_residual = max_abs(&appendix_equations(t1, t2, lambda, rho, alpha, &z));
    let [k21, k22, k11, k12, k0] = z;
    Ok(TwoPointSolution { lambda, k21, k22, k11, k12, k0, branch_id, residual, equation_residual, source, terms })
}

/// Evaluates the closed-form two-scenario solution verbatim (minus branch
/// for both curvature entries). The recorded residuals are informational;
/// the numeric solver is authoritative.
pub fn solve_two_point_closed(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    bound: f64,
) -> Result<TwoPointSolution> {
    check_inputs(lambda, rho, alpha, bound)?;
    let (z, terms) = closed_form(t1, t2, lambda, rho, alpha, [false, false])?;
    finish(z, t1, t2, lambda, rho, alpha, bound, 0, TwoPointSource::ClosedForm, Some(terms))
}

/// Solves the seven algebraic equations for every real branch.
///
/// At `λ ∈ {0, 1}` the coupling equations vanish and branches are
/// enumerated exactly. At interior `λ` a damped Gauss–Newton iteration runs
/// from four seeds. Returned branches satisfy every equation to `1e-8` and
/// are sorted by probe HJB residual, ties broken by `branch_id`.
pub fn solve_two_point_numeric(
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
    bound: f64,
) -> Result<Vec<TwoPointSolution>> {
    check_inputs(lambda, rho, alpha, bound)?;
    let eqs = |z: &[f64; 5]| appendix_equations(t1, t2, lambda, rho, alpha, z);
    let mut candidates: Vec<(usize, [f64; 5])> = Vec::new();
    let mut failures = Vec::new();

    if lambda == 0.0 || lambda == 1.0 {
        let active = if lambda == 1.0 { 0 } else { 1 };
        let inactive = 1 - active;
        for (ia, ka) in roots_in(&eqs, active, [0.0, 0.0]).into_iter().enumerate() {
            let mut base = [0.0; 2];
            base[active] = ka;
            for (ii, ki) in roots_in(&eqs, inactive, base).into_iter().enumerate() {
                let mut k2 = base;
                k2[inactive] = ki;
                let id = if active == 0 { 2 * ia + ii } else { 2 * ii + ia };
                match complete_seed(&eqs, t1, t2, lambda, k2) {
                    Some(z) => {
                        let r = max_abs(&eqs(&z));
                        if r <= EQUATION_TOL {
                            candidates.push((id, z));
                        } else {
                            failures.push(r);
                        }
                    }
                    None => failures.push(f64::NAN),
                }
            }
        }
    } else {
        for (id, seed) in interior_seeds(&eqs, t1, t2, lambda, rho, alpha) {
            let Some(seed) = seed else {
                failures.push(f64::NAN);
                continue;
            };
            let (z, r) = gauss_newton(&eqs, seed);
            let q = Mix::new(t1, t2, lambda).q(t1, t2, z[0], z[1]);
            if r <= EQUATION_TOL && q > 0.0 {
                if !candidates.iter().any(|(_, c)| same_branch(c, &z)) {
                    candidates.push((id, z));
                }
            } else {
                failures.push(r);
            }
        }
    }

    let mut out = Vec::with_capacity(candidates.len());
    for (id, z) in candidates {
        out.push(finish(z, t1, t2, lambda, rho, alpha, bound, id, TwoPointSource::Numeric, None)?);
    }
    if out.is_empty() {
        return Err(Error::NoConvergence { residuals: failures });
    }
    out.sort_by_key(|s| ((s.residual / RESIDUAL_TIE_TOL).floor() as i64, s.branch_id));
    Ok(out)
}

fn same_branch(a: &[f64; 5], b: &[f64; 5]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-8 * (1.0 + x.abs().max(y.abs())))
}

/// Real roots in `k2[slot]` of equation `slot` (a quadratic), holding the
/// other curvature entry fixed.
fn roots_in(eqs: &impl Fn(&[f64; 5]) -> [f64; 7], slot: usize, k2: [f64; 2]) -> Vec<f64> {
    let sample = |k: f64| {
        let mut z = [k2[0], k2[1], 0.0, 0.0, 0.0];
        z[slot] = k;
        eqs(&z)[slot]
    };
    roots_from_samples(sample(-1.0), sample(0.0), sample(1.0))
}

/// Given curvature entries, solves the two linear-term equations for
/// `(k11, k12)` and the constant-term equation for `k0`. Returns `None` on
/// a singular system or an inadmissible curvature.
fn complete_seed(
    eqs: &impl Fn(&[f64; 5]) -> [f64; 7],
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    k2: [f64; 2],
) -> Option<[f64; 5]> {
    if !(Mix::new(t1, t2, lambda).q(t1, t2, k2[0], k2[1]) > 0.0) {
        return None;
    }
    let at = |k11: f64, k12: f64, c: f64| eqs(&[k2[0], k2[1], k11, k12, c]);
    let r00 = at(0.0, 0.0, 0.0);
    let r10 = at(1.0, 0.0, 0.0);
    let r01 = at(0.0, 1.0, 0.0);
    let a = SMatrix::<f64, 2, 2>::new(r10[4] - r00[4], r01[4] - r00[4], r10[5] - r00[5], r01[5] - r00[5]);
    let rhs = SVector::<f64, 2>::new(-r00[4], -r00[5]);
    let sol = a.lu().solve(&rhs)?;
    let (k11, k12) = (sol[0], sol[1]);
    let e0 = at(k11, k12, 0.0)[6];
    let slope = at(k11, k12, 1.0)[6] - e0;
    if slope == 0.0 {
        return None;
    }
    let z = [k2[0], k2[1], k11, k12, -e0 / slope];
    z.iter().all(|v| v.is_finite()).then_some(z)
}

/// Four Gauss–Newton seeds indexed by branch id. The closed-form
/// expressions are tried first; when they fail the per-scenario Riccati
/// roots supply the curvature entries.
fn interior_seeds(
    eqs: &impl Fn(&[f64; 5]) -> [f64; 7],
    t1: &ThetaCoefficients,
    t2: &ThetaCoefficients,
    lambda: f64,
    rho: f64,
    alpha: f64,
) -> Vec<(usize, Option<[f64; 5]>)> {
    let riccati_roots = |c: &ThetaCoefficients| {
        let (a, b, cc) = super::curvature_coefficients(c, rho);
        crate::numerics::quadratic_roots(a, b, cc)
    };
    let r1 = riccati_roots(t1);
    let r2 = riccati_roots(t2);
    let mut seeds = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let closed = closed_form(t1, t2, lambda, rho, alpha, [i == 1, j == 1])
                .ok()
                .map(|(z, _)| z)
                .filter(|z| z.iter().all(|v| v.is_finite()));
            let seed = closed.or_else(|| match (r1, r2) {
                (Some(a), Some(b)) => complete_seed(eqs, t1, t2, lambda, [a[i], b[j]]),
                _ => None,
            });
            seeds.push((2 * i + j, seed));
        }
    }
    seeds
}

/// Damped Gauss–Newton on the overdetermined `7 × 5` system. Returns the
/// final iterate and its max residual.
fn gauss_newton(eqs: &impl Fn(&[f64; 5]) -> [f64; 7], seed: [f64; 5]) -> ([f64; 5], f64) {
    let norm = |r: &[f64; 7]| {
        if r.iter().any(|v| !v.is_finite()) {
            f64::INFINITY
        } else {
            r.iter().map(|v| v * v).sum::<f64>().sqrt()
        }
    };
    let mut z = seed;
    let mut r = eqs(&z);
    for _ in 0..NEWTON_MAX_ITER {
        if max_abs(&r) < NEWTON_RESIDUAL_TOL {
            break;
        }
        let mut jac = SMatrix::<f64, 7, 5>::zeros();
        for k in 0..5 {
            let h = 1e-6 * z[k].abs().max(1.0);
            let mut zp = z;
            let mut zm = z;
            zp[k] += h;
            zm[k] -= h;
            let (rp, rm) = (eqs(&zp), eqs(&zm));
            for e in 0..7 {
                jac[(e, k)] = (rp[e] - rm[e]) / (2.0 * h);
            }
        }
        // the SVD does not terminate on non-finite input
        if jac.iter().chain(r.iter()).any(|v| !v.is_finite()) {
            break;
        }
        let rv = SVector::<f64, 7>::from_row_slice(&r);
        let Ok(delta) = jac.svd(true, true).solve(&(-rv), 1e-14) else {
            break;
        };
        let current = norm(&r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let mut zn = z;
            for k in 0..5 {
                zn[k] += t * delta[k];
            }
            let rn = eqs(&zn);
            if norm(&rn) < current {
                accepted = Some((zn, rn));
                break;
            }
            t *= 0.5;
        }
        let Some((zn, rn)) = accepted else {
            break;
        };
        let step = (t * delta.norm()).abs();
        z = zn;
        r = rn;
        if step < NEWTON_STEP_TOL {
            break;
        }
    }
    (z, max_abs(&r))
}

/// Difference between a closed-form and a numeric solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedNumericComparison {
    /// Absolute differences in `[k21, k22, k11, k12, k0]`.
    pub diffs: [f64; 5],
    pub max_abs_diff: f64,
    pub agree: bool,
}

pub fn compare_closed_numeric(closed: &TwoPointSolution, numeric: &TwoPointSolution) -> ClosedNumericComparison {
    let a = closed.unknowns();
    let b = numeric.unknowns();
    let diffs = [0, 1, 2, 3, 4].map(|i| (a[i] - b[i]).abs());
    let max_abs_diff = max_abs(&diffs);
    ClosedNumericComparison { diffs, max_abs_diff, agree: max_abs_diff <= EQUATION_TOL }
}
