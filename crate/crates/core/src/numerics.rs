//! Small scalar numerical routines shared by the solvers.

use std::f64::consts::PI;

/// Real roots of `a k² + b k + c = 0`, in the order
/// `(−b − √Δ)/(2a)`, `(−b + √Δ)/(2a)`.
///
/// Each root is evaluated through whichever of the two algebraically
/// equivalent forms avoids cancellation. Returns `None` when `Δ < 0`.
/// The caller must handle `a == 0`.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<[f64; 2]> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || !disc.is_finite() {
        return None;
    }
    let sq = disc.sqrt();
    // (−b − √Δ)/(2a) == 2c/(−b + √Δ)
    let minus = if b >= 0.0 { (-b - sq) / (2.0 * a) } else { 2.0 * c / (-b + sq) };
    // (−b + √Δ)/(2a) == 2c/(−b − √Δ)
    let plus = if b <= 0.0 { (-b + sq) / (2.0 * a) } else { 2.0 * c / (-b - sq) };
    Some([minus, plus])
}

/// All real roots of a polynomial of degree ≤ 2 given by its values at
/// `k ∈ {−1, 0, 1}`. Linear and constant cases are handled. Roots are
/// returned in `quadratic_roots` order.
pub fn roots_from_samples(f_neg: f64, f_zero: f64, f_pos: f64) -> Vec<f64> {
    let c0 = f_zero;
    let c1 = 0.5 * (f_pos - f_neg);
    let c2 = 0.5 * (f_pos + f_neg) - f_zero;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if c2.abs() <= 1e-14 * scale {
        if c1.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    match quadratic_roots(c2, c1, c0) {
        Some([a, b]) if a == b => vec![a],
        Some([a, b]) => vec![a, b],
        None => Vec::new(),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss–Legendre rule on `[lo, hi]` with `panels` equal panels
/// of `order` nodes each. Returns `(nodes, weights)`.
pub fn composite_gauss_legendre(lo: f64, hi: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (z, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = lo + h * p as f64;
        let mid = a + 0.5 * h;
        for (zi, wi) in z.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * zi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Trapezoid rule for samples on a (possibly non-uniform) ordered grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the work that produced them was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample mean and standard error of the mean, both reduced pairwise.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let centered: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&centered) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Golden-section search for the maximizer of a unimodal function on
/// `[lo, hi]`, stopping when the bracket is narrower than `width`.
/// Returns every evaluated `(x, f(x))` pair, last entry the final midpoint.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, width: f64) -> Vec<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut trace = Vec::new();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    trace.push((c, fc));
    trace.push((d, fd));
    let mut iters = 0;
    while (b - a) > width && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            trace.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            trace.push((d, fd));
        }
        iters += 1;
    }
    let mid = 0.5 * (a + b);
    trace.push((mid, f(mid)));
    trace
}

/// Ordinary least-squares line fit, returns `(slope, intercept)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `n` equispaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
