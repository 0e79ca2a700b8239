//! Entropy-regularized linear-quadratic control under model uncertainty.
//!
//! The crate solves scalar LQ problems whose coefficients depend on an
//! unknown market index `θ`, where the controller optimizes against the
//! worst-case distribution of `θ` and randomizes its actions through a
//! Gaussian exploration policy. It provides
//!
//! - [`model`]: coefficient families, problem instances, assumption checks
//!   and the TOML configuration format,
//! - [`riccati`]: closed-form and numerically solved quadratic value
//!   functions together with HJB residuals,
//! - [`policy`]: Gaussian and grid-normalized Gibbs action distributions,
//! - [`sde_sim`]: Euler–Maruyama simulation and Monte-Carlo cost estimates,
//! - [`robust`]: the worst-case measure search and the numerical checks of
//!   the minimax exchange, solvability equivalence, exploration cost and the
//!   vanishing-exploration limit.

pub mod error;
pub mod model;
pub mod numerics;
pub mod policy;
pub mod riccati;
pub mod robust;
pub mod sde_sim;

pub use error::{Error, Result};
pub use model::{
    coefficients_at, validate, validate_two_point, validate_uniform, CoeffPolys, CoefficientFamily,
    ConditionCheck, Poly, Problem, ThetaCoefficients, UniformFamily, ValidationReport,
};
pub use policy::{GaussianPolicy, GridGibbsPolicy};
pub use riccati::{
    hjb_residual, solve_theta, solve_two_point_closed, solve_two_point_numeric, Quadratic,
    RootBranch, ThetaValueFunction, TwoPointSolution,
};
pub use robust::{RobustSolution, WorstCase};
pub use sde_sim::{MCEstimate, SimConfig};
