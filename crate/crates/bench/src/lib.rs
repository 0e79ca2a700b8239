//! Fixed problem instances shared by the benchmarks in `benches/`.

use explq_core::{CoeffPolys, Poly, ThetaCoefficients, UniformFamily};

pub const RHO: f64 = 2.5;
pub const ALPHA: f64 = 0.3;
pub const X0: f64 = 0.5;

pub fn scenario_one() -> ThetaCoefficients {
    ThetaCoefficients::new(-0.5, 1.0, 0.2, 0.5, 1.0, 0.0, 1.0, 0.0, 0.0).expect("valid fixture")
}

pub fn scenario_two() -> ThetaCoefficients {
    ThetaCoefficients::new(0.1, 0.8, 0.3, 0.4, 1.5, 0.1, 1.2, 0.2, -0.1).expect("valid fixture")
}

/// `A(θ) = -0.5 + θ`, `L(θ) = 1 + θ²`, `θ ~ U(0, a)` with `a ∈ [0.2, 1]`.
pub fn uniform_family() -> UniformFamily {
    let mut polys = CoeffPolys::constant(&scenario_one());
    polys.a = Poly::new(vec![-0.5, 1.0]).expect("valid fixture");
    polys.l = Poly::new(vec![1.0, 0.0, 1.0]).expect("valid fixture");
    UniformFamily::new(polys, 0.2, 1.0).expect("valid fixture")
}
