use serde::{Deserialize, Serialize};

/// Maximum supported degree of a coefficient polynomial in `θ`.
pub const MAX_DEGREE: usize = 4;

/// Real polynomial in `θ`, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Option<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_DEGREE + 1 || coeffs.iter().any(|c| !c.is_finite()) {
            return None;
        }
        Some(Poly(coeffs))
    }

    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * theta + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
    }

    /// Stationary points inside `[lo, hi]`, located by sign changes of the
    /// derivative on a fine grid followed by bisection.
    pub fn extrema_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let d = self.derivative();
        if d.degree() == 0 {
            return Vec::new();
        }
        const SAMPLES: usize = 4096;
        let mut out = Vec::new();
        let h = (hi - lo) / SAMPLES as f64;
        let mut x0 = lo;
        let mut f0 = d.eval(x0);
        for i in 1..=SAMPLES {
            let x1 = lo + h * i as f64;
            let f1 = d.eval(x1);
            if f0 == 0.0 {
                out.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut a, mut b, mut fa) = (x0, x1, f0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = d.eval(m);
                    if fm == 0.0 || (b - a) < 1e-15 * (1.0 + m.abs()) {
                        a = m;
                        b = m;
                        break;
                    }
                    if fa * fm < 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                out.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        if f0 == 0.0 {
            out.push(x0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_evaluation() {
        let p = Poly::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(p.eval(0.5), 2.0);
        let q = Poly::new(vec![1.0, 0.0, -3.0, 0.0, 1.0]).unwrap();
        assert_eq!(q.eval(2.0), 1.0 - 12.0 + 16.0);
    }

    #[test]
    fn rejects_degree_above_four() {
        assert!(Poly::new(vec![0.0; 6]).is_none());
        assert!(Poly::new(vec![]).is_none());
    }

    #[test]
    fn extrema_of_cubic() {
        // θ³ − 3θ has stationary points at ±1
        let p = Poly::new(vec![0.0, -3.0, 0.0, 1.0]).unwrap();
        let e = p.extrema_in(-2.0, 2.0);
        assert_eq!(e.len(), 2);
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        assert!(Poly::constant(3.0).extrema_in(0.0, 1.0).is_empty());
    }
}
