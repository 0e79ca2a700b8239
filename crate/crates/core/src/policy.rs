//! Exploration policies: the closed-form Gaussian and the grid-normalized
//! Gibbs density it comes from.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ThetaCoefficients;
use crate::numerics::{linspace, trapezoid};
use crate::riccati::Quadratic;

/// Smallest variance a policy may carry. Feedback laws without exploration
/// are represented at this floor.
pub const VARIANCE_FLOOR: f64 = 1e-300;

/// Default half-width of a Gibbs grid, in standard deviations.
pub const GRID_HALF_WIDTH_SD: f64 = 8.0;
/// Default number of Gibbs grid points.
pub const GRID_POINTS: usize = 801;

/// `u ∼ N(mean_slope · x + mean_intercept, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPolicy {
    pub mean_slope: f64,
    pub mean_intercept: f64,
    pub variance: f64,
}

impl GaussianPolicy {
    pub fn new(mean_slope: f64, mean_intercept: f64, variance: f64) -> Result<Self> {
        if !(mean_slope.is_finite() && mean_intercept.is_finite()) {
            return Err(Error::Domain(format!("non-finite mean coefficients ({mean_slope}, {mean_intercept})")));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::Domain(format!("variance must be finite and > 0, got {variance}")));
        }
        Ok(GaussianPolicy { mean_slope, mean_intercept, variance })
    }

    /// The deterministic feedback `u = slope · x + intercept`, held at the
    /// variance floor.
    pub fn feedback(mean_slope: f64, mean_intercept: f64) -> Result<Self> {
        Self::new(mean_slope, mean_intercept, VARIANCE_FLOOR)
    }

    pub fn mean(&self, x: f64) -> f64 {
        self.mean_slope * x + self.mean_intercept
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `½ ln(2πe σ²)`.
    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * PI * E * self.variance).ln()
    }

    pub fn density(&self, u: f64, x: f64) -> f64 {
        let z = u - self.mean(x);
        (-(z * z) / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean(x) + self.std_dev() * z
    }

    /// `mean ± 8σ` at `x` with 801 points.
    pub fn default_grid(&self, x: f64) -> Vec<f64> {
        let half = GRID_HALF_WIDTH_SD * self.std_dev();
        linspace(self.mean(x) - half, self.mean(x) + half, GRID_POINTS)
    }
}

/// The Gaussian minimizer of the Hamiltonian for the quadratic value `v`:
/// mean `−(S x + N + B v′(x) + C D x v″)/(R + D² v″)` and variance
/// `α/(R + D² v″)`.
pub fn gaussian_from_value(coeffs: &ThetaCoefficients, v: &Quadratic, alpha: f64) -> Result<GaussianPolicy> {
    let q = coeffs.r + coeffs.d * coeffs.d * v.k2;
    if !(q > 0.0) {
        return Err(Error::Domain(format!("R + D^2 k2 = {q} <= 0")));
    }
    let slope = -(coeffs.s + coeffs.b * v.k2 + coeffs.c * coeffs.d * v.k2) / q;
    let intercept = -(coeffs.n + coeffs.b * v.k1) / q;
    GaussianPolicy::new(slope, intercept, alpha / q)
}

/// Classical optimal feedback `u*(x)`, computed independently of
/// [`gaussian_from_value`] from the first-order condition of the
/// Hamiltonian.
pub fn classical_feedback(coeffs: &ThetaCoefficients, v: &Quadratic) -> Result<(f64, f64)> {
    // ∂/∂u [½Ru² + (Sx + N)u + v′(x)Bu + ½v″(Cx + Du)²] = 0
    let curvature = coeffs.r + v.d2() * coeffs.d * coeffs.d;
    if !(curvature > 0.0) {
        return Err(Error::Domain(format!("Hamiltonian curvature {curvature} <= 0")));
    }
    let x_coeff = coeffs.s + coeffs.b * v.k2 + v.d2() * coeffs.c * coeffs.d;
    let constant = coeffs.n + coeffs.b * v.k1;
    Ok((-x_coeff / curvature, -constant / curvature))
}

/// Sign convention for the Gibbs exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GibbsConvention {
    /// `exp{−(1/α)(f + v′b + ½v″σ²)}`, the minimizer of the entropy-regularized
    /// Hamiltonian.
    Minimizing,
    /// `exp{+(f + v′b + ½v″σ²)}`, the literal exponent without `−1/α`.
    AsDisplayed,
}

/// A density tabulated on an ordered action grid and normalized by the
/// trapezoid rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridGibbsPolicy {
    pub u_grid: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GridGibbsPolicy {
    pub fn mass(&self) -> f64 {
        trapezoid(&self.u_grid, &self.weights)
    }

    pub fn mean(&self) -> f64 {
        let y: Vec<f64> = self.u_grid.iter().zip(&self.weights).map(|(u, w)| u * w).collect();
        trapezoid(&self.u_grid, &y)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let y: Vec<f64> = self.u_grid.iter().zip(&self.weights).map(|(u, w)| (u - mu) * (u - mu) * w).collect();
        trapezoid(&self.u_grid, &y)
    }

    /// `−∫ w ln w` with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        let y: Vec<f64> = self.weights.iter().map(|&w| if w > 0.0 { -w * w.ln() } else { 0.0 }).collect();
        trapezoid(&self.u_grid, &y)
    }

    /// `½ ∫ |w − g|` against a reference density `g` sampled on the grid.
    pub fn total_variation(&self, reference: impl Fn(f64) -> f64) -> f64 {
        let y: Vec<f64> = self.u_grid.iter().zip(&self.weights).map(|(&u, w)| (w - reference(u)).abs()).collect();
        0.5 * trapezoid(&self.u_grid, &y)
    }
}

/// `f(x, u) + v′(x) b(x, u) + ½ v″ σ(x, u)²`.
pub fn hamiltonian(coeffs: &ThetaCoefficients, v: &Quadratic, x: f64, u: f64) -> f64 {
    let ThetaCoefficients { a, b, c, d, l, s, r, m, n } = *coeffs;
    let f = 0.5 * l * x * x + s * x * u + 0.5 * r * u * u + m * x + n * u;
    let drift = a * x + b * u;
    let diffusion = c * x + d * u;
    f + v.d1(x) * drift + 0.5 * v.d2() * diffusion * diffusion
}

/// Tabulates the Gibbs density of the Hamiltonian at state `x` on `u_grid`.
pub fn gibbs_on_grid(
    coeffs: &ThetaCoefficients,
    v: &Quadratic,
    alpha: f64,
    x: f64,
    u_grid: &[f64],
    convention: GibbsConvention,
) -> Result<GridGibbsPolicy> {
    if u_grid.len() < 2 {
        return Err(Error::GridCoverage(format!("grid has {} points", u_grid.len())));
    }
    if u_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridCoverage("grid must be strictly increasing".into()));
    }
    let exponent: Vec<f64> = u_grid
        .iter()
        .map(|&u| {
            let h = hamiltonian(coeffs, v, x, u);
            match convention {
                GibbsConvention::Minimizing => -h / alpha,
                GibbsConvention::AsDisplayed => h,
            }
        })
        .collect();
    let peak = exponent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::GridCoverage(format!("exponent peak {peak}")));
    }
    let raw: Vec<f64> = exponent.iter().map(|e| (e - peak).exp()).collect();
    let mass = trapezoid(u_grid, &raw);
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::GridCoverage(format!("unnormalizable weights (mass {mass})")));
    }
    Ok(GridGibbsPolicy { u_grid: u_grid.to_vec(), weights: raw.into_iter().map(|w| w / mass).collect() })
}
