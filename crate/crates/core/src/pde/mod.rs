//! Backward parabolic solves on a truncated grid: the HJB pair `(â→a, b)`
//! and the FBSDE pair `(η̃→η, φ)`, plus surface access with gradients.

mod equations;
mod grid;
mod solver;
mod surface;

pub use equations::{
    a_from_a_hat, gradient, gradient_growth_constant, interior_max, max_time_increase,
    semilinear_residual_a, solve_a_hat, solve_b, solve_eta, solve_phi,
};
pub use grid::GridSpec;
pub use solver::{solve_backward, LinearPde, SolverOptions};
pub use surface::{SurfaceTag, ValueSurface};

use crate::model::{ClaimModel, ModelSpec, UtilitySpec};
use crate::Result;

/// Both solution routes on one grid. The `a/b` pair and the `η/φ` pair are
/// produced by disjoint assembly paths so the cross-route identities keep
/// their teeth.
#[derive(Debug, Clone)]
pub struct SolvedSurfaces {
    pub a_hat: ValueSurface,
    pub a: ValueSurface,
    pub b: ValueSurface,
    pub eta: ValueSurface,
    pub phi: ValueSurface,
}

/// Convenience pipeline: solve all five surfaces with one call.
pub fn solve_all(
    model: &ModelSpec,
    claims: &ClaimModel,
    utility: &UtilitySpec,
    grid: &GridSpec,
    opts: &SolverOptions,
) -> Result<SolvedSurfaces> {
    let a_hat = solve_a_hat(model, utility, grid, opts)?;
    let a = a_from_a_hat(&a_hat, utility.risk_aversion)?;
    let b = solve_b(model, claims, utility, &a, opts)?;
    let eta = solve_eta(model, utility, grid, opts)?;
    let phi = solve_phi(model, claims, utility, &eta, opts)?;
    Ok(SolvedSurfaces {
        a_hat,
        a,
        b,
        eta,
        phi,
    })
}

#[cfg(test)]
mod tests;
