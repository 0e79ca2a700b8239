//! Quadratic value functions and HJB residuals.

mod two_point;

pub use two_point::{
    appendix_equations, compare_closed_numeric, solve_two_point_closed, solve_two_point_numeric,
    two_point_hjb_residual, two_point_probe_residual, ClosedFormTerms, ClosedNumericComparison, TwoPointSolution,
    TwoPointSource, PROBE_POINTS,
};

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{positive, ThetaCoefficients};
use crate::numerics::{linspace, quadratic_roots};

/// `v(x) = ½ k2 x² + k1 x + k0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadratic {
    pub k2: f64,
    pub k1: f64,
    pub k0: f64,
}

impl Quadratic {
    pub fn new(k2: f64, k1: f64, k0: f64) -> Self {
        Quadratic { k2, k1, k0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        0.5 * self.k2 * x * x + self.k1 * x + self.k0
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.k2 * x + self.k1
    }

    pub fn d2(&self) -> f64 {
        self.k2
    }
}

/// Which root of the curvature quadratic was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootBranch {
    /// `(−b̃ − √Δ)/(2ã)`
    Minus,
    /// `(−b̃ + √Δ)/(2ã)`
    Plus,
    /// `ã = 0`, the single root `−c̃/b̃`.
    Linear,
}

impl RootBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            RootBranch::Minus => "minus",
            RootBranch::Plus => "plus",
            RootBranch::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRoot {
    pub branch: RootBranch,
    pub value: f64,
    pub reason: String,
}

/// Quadratic solution of the single-scenario HJB equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaValueFunction {
    pub k2: f64,
    pub k1: f64,
    /// Constant term that makes the HJB residual vanish.
    pub k0: f64,
    /// The constant with the `+1` entropy offset,
    /// `−(N + B k1)²/(2ρq) − α(ln(2πeσ²) + 1)/(2ρ)`. It differs from `k0`
    /// by exactly `−α/ρ`.
    pub k0_displayed: f64,
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub c_tilde: f64,
    /// `q = R + D² k2 > 0`.
    pub control_weight: f64,
    /// `σ² = α/q`.
    pub variance: f64,
    pub branch: RootBranch,
    pub rejected: Option<RejectedRoot>,
}

impl ThetaValueFunction {
    pub fn quadratic(&self) -> Quadratic {
        Quadratic::new(self.k2, self.k1, self.k0)
    }

    pub fn displayed_quadratic(&self) -> Quadratic {
        Quadratic::new(self.k2, self.k1, self.k0_displayed)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.quadratic().eval(x)
    }
}

/// Coefficients `(ã, b̃, c̃)` of the curvature equation `ã k² + b̃ k + c̃ = 0`.
pub fn curvature_coefficients(c: &ThetaCoefficients, rho: f64) -> (f64, f64, f64) {
    let g = c.c * c.c + 2.0 * c.a - rho;
    let bcd = c.b + c.c * c.d;
    let a_tilde = g * c.d * c.d - bcd * bcd;
    let b_tilde = g * c.r - 2.0 * c.s * bcd + c.d * c.d * c.l;
    let c_tilde = c.r * c.l - c.s * c.s;
    (a_tilde, b_tilde, c_tilde)
}

/// `½ ln(2πe σ²)` written so that the caller controls the `±1` offset.
fn log_two_pi_e(variance: f64) -> f64 {
    (2.0 * PI * E * variance).ln()
}

/// Solves the single-scenario HJB equation with a quadratic ansatz.
///
/// The minus root is preferred; the plus root is used only when the minus
/// root makes `R + D² k2` nonpositive, and the rejection is recorded.
pub fn solve_theta(coeffs: &ThetaCoefficients, rho: f64, alpha: f64) -> Result<ThetaValueFunction> {
    positive("rho", rho)?;
    positive("alpha", alpha)?;
    let (a_t, b_t, c_t) = curvature_coefficients(coeffs, rho);
    let d2 = coeffs.d * coeffs.d;
    let weight = |k2: f64| coeffs.r + d2 * k2;

    let scale = b_t.abs().max(c_t.abs());
    let (k2, branch, rejected) = if a_t.abs() <= 1e-14 * scale {
        if b_t == 0.0 {
            return Err(Error::DegenerateQuadratic(format!("a~ = {a_t}, b~ = 0")));
        }
        let k2 = -c_t / b_t;
        if weight(k2) <= 0.0 {
            return Err(Error::InadmissibleRoot(format!("linear root k2 = {k2} gives R + D^2 k2 = {}", weight(k2))));
        }
        (k2, RootBranch::Linear, None)
    } else {
        let disc = b_t * b_t - 4.0 * a_t * c_t;
        let [minus, plus] = quadratic_roots(a_t, b_t, c_t).ok_or_else(|| Error::NoRealSolution {
            discriminant: disc,
            context: format!("a~ = {a_t}, b~ = {b_t}, c~ = {c_t}"),
        })?;
        if weight(minus) > 0.0 {
            (minus, RootBranch::Minus, None)
        } else if weight(plus) > 0.0 {
            let reason = format!("R + D^2 k2 = {} <= 0", weight(minus));
            (plus, RootBranch::Plus, Some(RejectedRoot { branch: RootBranch::Minus, value: minus, reason }))
        } else {
            return Err(Error::InadmissibleRoot(format!(
                "both roots {minus}, {plus} give R + D^2 k2 <= 0 ({}, {})",
                weight(minus),
                weight(plus)
            )));
        }
    };

    let q = weight(k2);
    let beta = coeffs.s + (coeffs.b + coeffs.c * coeffs.d) * k2;
    let den = q * (rho - coeffs.a) + coeffs.b * beta;
    if den == 0.0 || !den.is_finite() {
        return Err(Error::SingularLinearSystem(format!("k1 denominator (R + D^2 k2)(rho - A) + B beta = {den}")));
    }
    let k1 = (q * coeffs.m - coeffs.n * beta) / den;
    let variance = alpha / q;
    let linear = coeffs.n + coeffs.b * k1;
    let feedback = -linear * linear / (2.0 * rho * q);
    let log = log_two_pi_e(variance);
    let k0 = feedback - alpha * (log - 1.0) / (2.0 * rho);
    let k0_displayed = feedback - alpha * (log + 1.0) / (2.0 * rho);

    Ok(ThetaValueFunction {
        k2,
        k1,
        k0,
        k0_displayed,
        a_tilde: a_t,
        b_tilde: b_t,
        c_tilde: c_t,
        control_weight: q,
        variance,
        branch,
        rejected,
    })
}

/// `ρ v(x)` minus the right-hand side of the reorganized single-scenario HJB
/// equation, evaluated at `x`.
pub fn hjb_residual(v: &Quadratic, coeffs: &ThetaCoefficients, rho: f64, alpha: f64, x: f64) -> Result<f64> {
    let ThetaCoefficients { a, b, c, d, l, s, r, m, n } = *coeffs;
    let q = r + d * d * v.d2();
    if !(q > 0.0) {
        return Err(Error::Domain(format!("R + D^2 v'' = {q} <= 0")));
    }
    let variance = alpha / q;
    let vp = v.d1(x);
    let vpp = v.d2();
    let z = s * x + n + b * vp + c * d * x * vpp;
    let rhs = -z * z / (2.0 * q) + 0.5 * l * x * x + m * x + vp * a * x + 0.5 * vpp * c * c * x * x
        - 0.5 * alpha * (log_two_pi_e(variance) - 1.0);
    Ok(rho * v.eval(x) - rhs)
}

/// Max |hjb_residual| over `PROBE_POINTS` equispaced points on `[−bound, bound]`.
pub fn probe_residual(v: &Quadratic, coeffs: &ThetaCoefficients, rho: f64, alpha: f64, bound: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in linspace(-bound, bound, PROBE_POINTS) {
        worst = worst.max(hjb_residual(v, coeffs, rho, alpha, x)?.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn derived() -> ThetaCoefficients {
        ThetaCoefficients::new(0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn derived_instance_matches_hand_values() {
        let v = solve_theta(&derived(), 2.0, 0.5).unwrap();
        assert_eq!((v.a_tilde, v.b_tilde, v.c_tilde), (-3.0, -1.0, 1.0));
        let k2 = (13f64.sqrt() - 1.0) / 6.0;
        assert!((v.k2 - k2).abs() < 1e-15);
        assert_eq!(v.k1, 0.0);
        assert_eq!(v.branch, RootBranch::Minus);
        assert!((v.variance - 0.5 / (1.0 + k2)).abs() < 1e-15);
        // displayed constant: −0.5(ln(2πe·σ²) + 1)/4
        let disp = -0.5 * ((2.0 * PI * E * 0.5 / (1.0 + k2)).ln() + 1.0) / 4.0;
        assert!((v.k0_displayed - disp).abs() < 1e-15);
        assert!((v.k0_displayed + 0.3480102328643365).abs() < 1e-12);
        assert!((v.k0 - v.k0_displayed - 0.25).abs() < 1e-15);
    }

    #[test]
    fn displayed_constant_misses_hjb_by_alpha_over_two() {
        let c = derived();
        let v = solve_theta(&c, 2.0, 0.5).unwrap();
        let r = hjb_residual(&v.displayed_quadratic(), &c, 2.0, 0.5, 0.0).unwrap();
        assert!((r + 0.5).abs() < 1e-14);
        assert!(hjb_residual(&v.quadratic(), &c, 2.0, 0.5, 0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn zero_state_cost_forces_zero_curvature() {
        let c = ThetaCoefficients { a: 0.0, b: 1.0, c: 0.0, d: 1.0, l: 0.0, s: 0.0, r: 1.0, m: 0.0, n: 0.0 };
        let v = solve_theta(&c, 1.0, 1.0).unwrap();
        assert_eq!(v.c_tilde, 0.0);
        assert_eq!(v.k2, 0.0);
        assert_eq!(v.k1, 0.0);
        let expect = -((2.0 * PI * E).ln() + 1.0) / 2.0;
        assert!((v.k0_displayed - expect).abs() < 1e-15);
    }

    #[test]
    fn entropy_only_residual() {
        let c = ThetaCoefficients { a: 0.0, b: 0.0, c: 0.0, d: 0.0, l: 0.0, s: 0.0, r: 2.0, m: 0.0, n: 0.0 };
        let alpha = 0.7;
        let expect = 0.5 * alpha * ((2.0 * PI * E * alpha / 2.0).ln() - 1.0);
        for x in [-1.0, 0.0, 3.0] {
            let r = hjb_residual(&Quadratic::new(0.0, 0.0, 0.0), &c, 1.0, alpha, x).unwrap();
            assert!((r - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbed_curvature_is_detected() {
        let c = derived();
        let v = solve_theta(&c, 2.0, 0.5).unwrap();
        let mut bad = v.quadratic();
        bad.k2 += 0.1;
        assert!(hjb_residual(&bad, &c, 2.0, 0.5, 1.0).unwrap() > 1e-3);
    }

    #[test]
    fn plus_root_fallback_is_recorded() {
        // B = C = 0, D = 1: the quadratic factors as (g k + L)(k + R) with
        // g = 2A − ρ = 3, so the minus root −R gives R + k2 = 0.
        let c = ThetaCoefficients::new(2.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let v = solve_theta(&c, 1.0, 1.0).unwrap();
        assert_eq!(v.branch, RootBranch::Plus);
        assert!((v.k2 + 1.0 / 3.0).abs() < 1e-15);
        let rejected = v.rejected.unwrap();
        assert_eq!(rejected.branch, RootBranch::Minus);
        assert!((rejected.value + 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_branch_when_control_absent() {
        // B = D = 0: ã = 0 and k2 = −c~/b~ = −RL/((C² + 2A − ρ)R)
        let c = ThetaCoefficients::new(0.8, 0.0, 0.3, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let v = solve_theta(&c, 1.0, 0.5).unwrap();
        assert_eq!(v.branch, RootBranch::Linear);
        assert!((v.k2 + 1.0 / 0.69).abs() < 1e-14);
    }

    #[test]
    fn negative_discriminant_is_an_error() {
        // RL < S² is needed: ã = c̃ = −1 and (B − S)² = 0.5 give Δ = 2.25 − 4
        let b = 2.0 + 0.5f64.sqrt();
        let c = ThetaCoefficients::new(0.5 * b * b, b, 0.0, 1.0, 3.0, 2.0, 1.0, 0.0, 0.0).unwrap();
        let (a, b, cc) = curvature_coefficients(&c, 1.0);
        assert!(b * b - 4.0 * a * cc < 0.0);
        assert!(matches!(solve_theta(&c, 1.0, 1.0), Err(Error::NoRealSolution { .. })));
    }
}
