//! Coefficient families, problem instances and the standing-assumption
//! validators.

mod config;
mod poly;

pub use config::{default_horizon, override_table, RunConfig, SimSettings, OVERRIDABLE_PARAMS};
pub use poly::{Poly, MAX_DEGREE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linspace;

/// Points of the equispaced θ grid used by the uniform-family checks.
pub const UNIFORM_GRID_POINTS: usize = 1001;

/// Tolerance for the equality condition `R_θ + D_θ² V_θ = 0`.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Dynamics and running-cost coefficients of one market scenario.
///
/// State dynamics `dX = (a X + b u) dt + (c X + d u) dW` and running cost
/// `½ l X² + s X u + ½ r u² + m X + n u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaCoefficients {
    /// Drift state gain (1/time).
    pub a: f64,
    /// Drift control gain (1/time).
    pub b: f64,
    /// Diffusion state gain (1/√time).
    pub c: f64,
    /// Diffusion control gain (1/√time).
    pub d: f64,
    /// State-quadratic cost weight, must be positive.
    pub l: f64,
    /// Cross cost weight.
    pub s: f64,
    /// Control-quadratic cost weight, must be positive.
    pub r: f64,
    /// State-linear cost weight.
    pub m: f64,
    /// Control-linear cost weight.
    pub n: f64,
}

impl ThetaCoefficients {
    pub const FIELD_NAMES: [&'static str; 9] = ["A", "B", "C", "D", "L", "S", "R", "M", "N"];

    #[allow(clippy::too_many_arguments)]
    pub fn new(a: f64, b: f64, c: f64, d: f64, l: f64, s: f64, r: f64, m: f64, n: f64) -> Result<Self> {
        let coeffs = ThetaCoefficients { a, b, c, d, l, s, r, m, n };
        coeffs.check()?;
        Ok(coeffs)
    }

    pub fn from_array(v: [f64; 9]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8])
    }

    pub fn to_array(&self) -> [f64; 9] {
        [self.a, self.b, self.c, self.d, self.l, self.s, self.r, self.m, self.n]
    }

    /// Checks finiteness and `L > 0`, `R > 0`.
    pub fn check(&self) -> Result<()> {
        for (name, v) in Self::FIELD_NAMES.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(Error::InvalidCoefficient { field: name, reason: format!("not finite ({v})") });
            }
        }
        if self.l <= 0.0 {
            return Err(Error::InvalidCoefficient { field: "L", reason: format!("must be > 0, got {}", self.l) });
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidCoefficient { field: "R", reason: format!("must be > 0, got {}", self.r) });
        }
        Ok(())
    }

    /// `2A + C² + max[(D²S² − 2RS(B + CD))/R, 0]`, the per-scenario lower
    /// bound on the discount rate.
    pub fn rho_floor(&self) -> f64 {
        2.0 * self.a + self.c * self.c + self.cross_excess()
    }

    fn cross_excess(&self) -> f64 {
        let t = (self.d * self.d * self.s * self.s - 2.0 * self.r * self.s * (self.b + self.c * self.d)) / self.r;
        t.max(0.0)
    }

    /// `R L − S²`.
    pub fn cost_definiteness(&self) -> f64 {
        self.r * self.l - self.s * self.s
    }
}

/// Per-field polynomials in `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffPolys {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
    pub d: Poly,
    pub l: Poly,
    pub s: Poly,
    pub r: Poly,
    pub m: Poly,
    pub n: Poly,
}

impl CoeffPolys {
    pub fn constant(c: &ThetaCoefficients) -> Self {
        let [a, b, cc, d, l, s, r, m, n] = c.to_array().map(Poly::constant);
        CoeffPolys { a, b, c: cc, d, l, s, r, m, n }
    }

    pub fn fields(&self) -> [&Poly; 9] {
        [&self.a, &self.b, &self.c, &self.d, &self.l, &self.s, &self.r, &self.m, &self.n]
    }

    /// Evaluates every field at `theta` without checking invariants.
    pub fn eval_unchecked(&self, theta: f64) -> ThetaCoefficients {
        let v = self.fields().map(|p| p.eval(theta));
        ThetaCoefficients { a: v[0], b: v[1], c: v[2], d: v[3], l: v[4], s: v[5], r: v[6], m: v[7], n: v[8] }
    }
}

/// `θ ∼ U(0, a)` with `a ∈ [a1, a2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformFamily {
    pub polys: CoeffPolys,
    pub a1: f64,
    pub a2: f64,
}

impl UniformFamily {
    pub fn new(polys: CoeffPolys, a1: f64, a2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite()) || a1 <= 0.0 || a1 >= a2 {
            return Err(Error::InvalidParameter {
                name: "a1",
                reason: format!("need 0 < a1 < a2, got a1 = {a1}, a2 = {a2}"),
            });
        }
        let family = UniformFamily { polys, a1, a2 };
        for theta in family.validation_grid() {
            family.polys.eval_unchecked(theta).check().map_err(|e| match e {
                Error::InvalidCoefficient { field, reason } => {
                    Error::InvalidCoefficient { field, reason: format!("{reason} at theta = {theta}") }
                }
                other => other,
            })?;
        }
        Ok(family)
    }

    /// 1001 equispaced points on `[0, a2]` plus the stationary points of every
    /// field polynomial, sorted.
    pub fn validation_grid(&self) -> Vec<f64> {
        let mut grid = linspace(0.0, self.a2, UNIFORM_GRID_POINTS);
        for p in self.polys.fields() {
            grid.extend(p.extrema_in(0.0, self.a2));
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }
}

/// The uncertainty set over market scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientFamily {
    /// A single known scenario, `Θ = {1}`.
    Single(ThetaCoefficients),
    /// `Θ = {1, 2}` with `Q^λ({1}) = λ`.
    TwoPoint { theta1: ThetaCoefficients, theta2: ThetaCoefficients },
    /// Polynomial coefficients with `θ ∼ U(0, a)`.
    UniformPoly(UniformFamily),
}

impl CoefficientFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            CoefficientFamily::Single(_) => "single",
            CoefficientFamily::TwoPoint { .. } => "two_point",
            CoefficientFamily::UniformPoly(_) => "uniform",
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            CoefficientFamily::Single(c) => c.check(),
            CoefficientFamily::TwoPoint { theta1, theta2 } => {
                theta1.check().map_err(|e| e.in_scenario("theta1"))?;
                theta2.check().map_err(|e| e.in_scenario("theta2"))
            }
            CoefficientFamily::UniformPoly(u) => UniformFamily::new(u.polys.clone(), u.a1, u.a2).map(|_| ()),
        }
    }
}

/// Evaluated coefficients of `family` at `theta`.
pub fn coefficients_at(family: &CoefficientFamily, theta: f64) -> Result<ThetaCoefficients> {
    match family {
        CoefficientFamily::Single(c) if theta == 1.0 => Ok(*c),
        CoefficientFamily::TwoPoint { theta1, .. } if theta == 1.0 => Ok(*theta1),
        CoefficientFamily::TwoPoint { theta2, .. } if theta == 2.0 => Ok(*theta2),
        CoefficientFamily::Single(_) => Err(Error::Domain(format!("theta = {theta} outside {{1}}"))),
        CoefficientFamily::TwoPoint { .. } => Err(Error::Domain(format!("theta = {theta} outside {{1, 2}}"))),
        CoefficientFamily::UniformPoly(u) => {
            if !(0.0..=u.a2).contains(&theta) {
                return Err(Error::Domain(format!("theta = {theta} outside [0, {}]", u.a2)));
            }
            Ok(u.polys.eval_unchecked(theta))
        }
    }
}

/// A robust entropy-regularized LQ instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub family: CoefficientFamily,
    /// Discount rate (1/time).
    pub rho: f64,
    /// Exploration weight on the entropy.
    pub alpha: f64,
    /// Bound on initial states, `x ∈ [−M, M]`.
    pub state_bound: f64,
}

impl Problem {
    pub fn new(family: CoefficientFamily, rho: f64, alpha: f64, state_bound: f64) -> Result<Self> {
        positive("rho", rho)?;
        positive("alpha", alpha)?;
        positive("state_bound", state_bound)?;
        family.check()?;
        Ok(Problem { family, rho, alpha, state_bound })
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {v}") })
    }
}

/// One inequality (or equality) of an assumption check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    /// The evaluated left-hand side.
    pub lhs: f64,
    /// The threshold it is compared with.
    pub rhs: f64,
    pub passed: bool,
    /// Whether a failure blocks solving unless forced.
    pub blocking: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    fn push(&mut self, name: impl Into<String>, lhs: f64, rhs: f64, passed: bool, blocking: bool, note: impl Into<String>) {
        self.checks.push(ConditionCheck { name: name.into(), lhs, rhs, passed, blocking, note: note.into() });
    }

    /// All listed conditions hold.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// All blocking conditions hold.
    pub fn admits_solve(&self) -> bool {
        self.checks.iter().filter(|c| c.blocking).all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn push_scenario_checks(report: &mut ValidationReport, label: &str, coeffs: &ThetaCoefficients, rho: f64) {
    let floor = coeffs.rho_floor();
    report.push(format!("{label}.rho_bound"), rho, floor, rho > floor, true, "rho > 2A + C^2 + max[(D^2 S^2 - 2RS(B + CD))/R, 0]");
    let def = coeffs.cost_definiteness();
    report.push(format!("{label}.rl_gt_s2"), def, 0.0, def > 0.0, true, "R L - S^2 > 0");
}

/// Coupling ratios of the two-point family. `None` marks a vanishing
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRatios {
    /// `(B1B2 + C2D2B1 + C1C2D1D2)(S2B1 + C1D1S2)`
    pub den1: f64,
    /// `(B1B2 + C1D1B2 + C1C2D1D2)(S1B2 + C2D2S1)`
    pub den2: f64,
    pub v1: Option<f64>,
    pub v2: Option<f64>,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
}

impl CouplingRatios {
    pub fn new(t1: &ThetaCoefficients, t2: &ThetaCoefficients) -> Self {
        let (c1d1, c2d2) = (t1.c * t1.d, t2.c * t2.d);
        let cross = t1.c * t2.c * t1.d * t2.d;
        let den1 = (t1.b * t2.b + c2d2 * t1.b + cross) * (t2.s * t1.b + c1d1 * t2.s);
        let den2 = (t1.b * t2.b + c1d1 * t2.b + cross) * (t1.s * t2.b + c2d2 * t1.s);
        let ss = t1.s * t2.s;
        let ratio = |num: f64, den: f64| if den != 0.0 { Some(num / den) } else { None };
        CouplingRatios {
            den1,
            den2,
            v1: ratio(ss * (c1d1 * t2.b - c2d2 * t1.b), den1),
            v2: ratio(ss * (c2d2 * t1.b - c1d1 * t2.b), den2),
            u1: ratio(den2, den1),
            u2: ratio(den1, den2),
        }
    }
}

/// Checks the two-point standing assumptions at mixing weight `lambda`.
///
/// Items (i)–(iv) are reported verbatim and do not block solving: (ii) is an
/// exact equality, and (ii)–(iv) constrain only the interior-λ coupling,
/// which the robust optimizer never uses. The blocking conditions are the
/// per-scenario bounds, i.e. item (i) at `λ ∈ {0, 1}` together with
/// `R_θ L_θ > S_θ²`.
pub fn validate_two_point(p: &Problem, lambda: f64) -> Result<ValidationReport> {
    let CoefficientFamily::TwoPoint { theta1, theta2 } = &p.family else {
        return Err(Error::FamilyMismatch { expected: "two_point" });
    };
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("must lie in [0, 1], got {lambda}") });
    }
    let mut report = ValidationReport::default();
    push_scenario_checks(&mut report, "theta1", theta1, p.rho);
    push_scenario_checks(&mut report, "theta2", theta2, p.rho);

    let bound = two_point_rho_bound(theta1, theta2, lambda);
    report.push("i.rho_bound", p.rho, bound, p.rho > bound, false, format!("lambda = {lambda}"));

    let cr = CouplingRatios::new(theta1, theta2);
    for (label, v, t) in [("1", cr.v1, theta1), ("2", cr.v2, theta2)] {
        match v {
            Some(v) => {
                let e = (t.r + t.d * t.d * v).abs();
                report.push(format!("ii.equality_{label}"), e, EQUALITY_TOL, e < EQUALITY_TOL, false, format!("|R + D^2 V| with V{label} = {v}"));
            }
            None => report.push(format!("ii.equality_{label}"), f64::NAN, EQUALITY_TOL, false, false, format!("V{label} undefined")),
        }
    }
    report.push("iii.denominator_1", cr.den1, 0.0, cr.den1 != 0.0, false, "V1 denominator nonzero");
    report.push("iii.denominator_2", cr.den2, 0.0, cr.den2 != 0.0, false, "V2 denominator nonzero");
    for (label, v, t) in [("1", cr.v1, theta1), ("2", cr.v2, theta2)] {
        let lhs = v.map_or(f64::NAN, |v| t.s * t.s + t.d * t.d * t.l * v);
        report.push(format!("iv.sign_{label}"), lhs, 0.0, lhs < 0.0, false, format!("S{label}^2 + D{label}^2 L{label} V{label} < 0"));
    }
    Ok(report)
}

/// Lower bound on ρ from item (i) at weight `lambda`.
pub fn two_point_rho_bound(t1: &ThetaCoefficients, t2: &ThetaCoefficients, lambda: f64) -> f64 {
    let w1 = lambda;
    let w2 = 1.0 - lambda;
    let b1 = 2.0 * (w1 * t1.a + 0.5 * w1 * t1.c * t1.c) + t1.cross_excess();
    let b2 = 2.0 * (w2 * t2.a + 0.5 * w2 * t2.c * t2.c) + t2.cross_excess();
    b1.max(b2)
}

/// Checks the uniform-family discount bound and `R_θ L_θ > S_θ²` over the
/// validation grid. Both are blocking; notes carry the worst θ.
pub fn validate_uniform(p: &Problem) -> Result<ValidationReport> {
    let CoefficientFamily::UniformPoly(u) = &p.family else {
        return Err(Error::FamilyMismatch { expected: "uniform" });
    };
    let grid = u.validation_grid();
    let (mut sup, mut sup_at) = (f64::NEG_INFINITY, 0.0);
    let (mut min_def, mut min_at) = (f64::INFINITY, 0.0);
    for &theta in &grid {
        let c = u.polys.eval_unchecked(theta);
        let floor = c.rho_floor();
        if floor > sup {
            sup = floor;
            sup_at = theta;
        }
        let def = c.cost_definiteness();
        if def < min_def {
            min_def = def;
            min_at = theta;
        }
    }
    let mut report = ValidationReport::default();
    report.push("rho_bound", p.rho, sup, p.rho > sup, true, format!("worst theta = {sup_at}, margin = {}", p.rho - sup));
    report.push("rl_gt_s2", min_def, 0.0, min_def > 0.0, true, format!("worst theta = {min_at}"));
    Ok(report)
}

/// Dispatches to the validator of the problem's family. `lambda` is used by
/// the two-point family only.
pub fn validate(p: &Problem, lambda: f64) -> Result<ValidationReport> {
    match &p.family {
        CoefficientFamily::Single(c) => {
            let mut report = ValidationReport::default();
            push_scenario_checks(&mut report, "theta1", c, p.rho);
            Ok(report)
        }
        CoefficientFamily::TwoPoint { .. } => validate_two_point(p, lambda),
        CoefficientFamily::UniformPoly(_) => validate_uniform(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(v: [f64; 9]) -> ThetaCoefficients {
        ThetaCoefficients::from_array(v).unwrap()
    }

    fn two_point(t1: ThetaCoefficients, t2: ThetaCoefficients, rho: f64) -> Problem {
        Problem::new(CoefficientFamily::TwoPoint { theta1: t1, theta2: t2 }, rho, 1.0, 5.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_cost_weights() {
        let err = ThetaCoefficients::new(0.0, 1.0, 0.0, 1.0, 1.0, 0.0, -1.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidCoefficient { field: "R", .. }));
        assert!(ThetaCoefficients::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ThetaCoefficients::new(f64::NAN, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn problem_rejects_nonpositive_parameters() {
        let c = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        for (rho, alpha, bound) in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)] {
            assert!(Problem::new(CoefficientFamily::Single(c), rho, alpha, bound).is_err());
        }
    }

    #[test]
    fn identical_scenarios_fail_sign_condition() {
        let t = coeffs([0.1, 1.0, 0.2, 0.5, 1.0, 0.3, 1.0, 0.0, 0.0]);
        let report = validate_two_point(&two_point(t, t, 3.0), 0.5).unwrap();
        let cr = CouplingRatios::new(&t, &t);
        assert_eq!(cr.v1, Some(0.0));
        assert_eq!(cr.v2, Some(0.0));
        let iv = report.get("iv.sign_1").unwrap();
        assert_eq!(iv.lhs, t.s * t.s);
        assert!(!iv.passed);
        assert!(!report.passed());
    }

    #[test]
    fn zero_drift_pair_reduces_rho_bound_to_positivity() {
        let t1 = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let t2 = coeffs([0.0, 2.0, 0.0, 0.5, 2.0, 0.0, 3.0, 0.0, 0.0]);
        let report = validate_two_point(&two_point(t1, t2, 1.0), 0.3).unwrap();
        let i = report.get("i.rho_bound").unwrap();
        assert_eq!(i.rhs, 0.0);
        assert!(i.passed);
        assert!(report.admits_solve());
    }

    #[test]
    fn singular_denominator_is_reported_not_raised() {
        // S = 0 zeroes both denominators
        let t = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let report = validate_two_point(&two_point(t, t, 1.0), 1.0).unwrap();
        assert!(!report.get("iii.denominator_1").unwrap().passed);
        assert!(!report.get("ii.equality_1").unwrap().passed);
        assert!(report.admits_solve());
    }

    #[test]
    fn rejects_lambda_outside_unit_interval() {
        let t = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(validate_two_point(&two_point(t, t, 1.0), 1.5).is_err());
    }

    #[test]
    fn coefficients_at_lookup_and_domain() {
        let t1 = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let t2 = coeffs([0.5, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let fam = CoefficientFamily::TwoPoint { theta1: t1, theta2: t2 };
        assert_eq!(coefficients_at(&fam, 1.0).unwrap(), t1);
        assert_eq!(coefficients_at(&fam, 2.0).unwrap(), t2);
        assert!(matches!(coefficients_at(&fam, 1.5), Err(Error::Domain(_))));

        let mut polys = CoeffPolys::constant(&t1);
        polys.a = Poly::new(vec![1.0, 2.0]).unwrap();
        let fam = CoefficientFamily::UniformPoly(UniformFamily::new(polys, 0.5, 1.0).unwrap());
        assert_eq!(coefficients_at(&fam, 0.5).unwrap().a, 2.0);
        assert!(coefficients_at(&fam, 1.01).is_err());
        assert!(coefficients_at(&fam, -0.1).is_err());
    }

    #[test]
    fn constant_uniform_family_returns_constants() {
        let t = coeffs([0.3, 1.0, 0.2, 0.4, 1.5, 0.1, 2.0, 0.7, -0.2]);
        let fam = CoefficientFamily::UniformPoly(UniformFamily::new(CoeffPolys::constant(&t), 0.2, 0.9).unwrap());
        for theta in [0.0, 0.33, 0.9] {
            assert_eq!(coefficients_at(&fam, theta).unwrap(), t);
        }
    }

    fn uniform_problem(polys: CoeffPolys, rho: f64) -> Problem {
        Problem::new(CoefficientFamily::UniformPoly(UniformFamily::new(polys, 0.5, 1.0).unwrap()), rho, 1.0, 5.0).unwrap()
    }

    #[test]
    fn uniform_constant_instance_margin() {
        let t = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let report = validate_uniform(&uniform_problem(CoeffPolys::constant(&t), 0.1)).unwrap();
        let c = report.get("rho_bound").unwrap();
        assert!(report.passed());
        assert_eq!(c.rhs, 0.0);
        assert!((c.lhs - c.rhs - 0.1).abs() < 1e-15);
    }

    #[test]
    fn uniform_indefinite_cost_fails_everywhere() {
        let t = coeffs([0.0, 1.0, 0.0, 1.0, 0.5, 1.0, 1.0, 0.0, 0.0]);
        let report = validate_uniform(&uniform_problem(CoeffPolys::constant(&t), 10.0)).unwrap();
        let c = report.get("rl_gt_s2").unwrap();
        assert!(!c.passed);
        assert!((c.lhs + 0.5).abs() < 1e-15);
        assert!(!report.admits_solve());
    }

    #[test]
    fn uniform_linear_drift_grid_sup() {
        let t = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let mut polys = CoeffPolys::constant(&t);
        polys.a = Poly::new(vec![0.0, 1.0]).unwrap();
        let p = uniform_problem(polys.clone(), 2.5);
        let report = validate_uniform(&p).unwrap();
        // independent oracle: 10^4-point scan of 2A(θ) on [0, 1]
        let oracle = (0..=10_000).map(|i| 2.0 * polys.a.eval(i as f64 / 10_000.0)).fold(f64::MIN, f64::max);
        let c = report.get("rho_bound").unwrap();
        assert!((c.rhs - oracle).abs() < 1e-12);
        assert!((c.rhs - 2.0).abs() < 1e-12);
        assert!(report.passed());
    }

    #[test]
    fn uniform_grid_includes_interior_extremum() {
        // A(θ) = −(θ − 0.3337)² + 1 peaks between grid points
        let t = coeffs([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let mut polys = CoeffPolys::constant(&t);
        let c0 = 0.3337f64;
        polys.a = Poly::new(vec![1.0 - c0 * c0, 2.0 * c0, -1.0]).unwrap();
        let report = validate_uniform(&uniform_problem(polys, 5.0)).unwrap();
        assert!((report.get("rho_bound").unwrap().rhs - 2.0).abs() < 1e-12);
    }
}
