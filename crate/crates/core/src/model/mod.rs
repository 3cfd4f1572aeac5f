//! Market, claim, and utility inputs as validated parametric objects.
//!
//! A [`ModelSpec`] owns every scalar the equations consume: the riskless
//! rate `r`, asset drifts `mu`, asset volatility `sigma_p` (m×m), factor
//! drift `g`, and factor volatility `sigma_f` (n×m), each drawn from the
//! closed [`Coefficient`] catalog. All objects are immutable after
//! construction and safe to share across workers.

mod claims;
mod coefficient;
mod validate;

pub use claims::{ClaimDistribution, ClaimModel};
pub use coefficient::Coefficient;
pub use validate::{validate, ProbeLattice, ValidationReport};

use crate::error::{Error, Result};
use crate::linalg;

/// Parametric market model. `sigma_p` and `sigma_f` are stored row-major.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub factor_dim: usize,
    pub asset_dim: usize,
    pub r: Coefficient,
    pub mu: Vec<Coefficient>,
    pub sigma_p: Vec<Coefficient>,
    pub g: Vec<Coefficient>,
    pub sigma_f: Vec<Coefficient>,
    /// Declared upper bound on the riskless rate (A4).
    pub r_bar: f64,
    /// Declared eigenvalue window `[mu1, mu2]` for `σ_p σ_p*` and
    /// `σ_f σ_f*` (A3).
    pub eigen_bounds: (f64, f64),
}

impl ModelSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        factor_dim: usize,
        asset_dim: usize,
        r: Coefficient,
        mu: Vec<Coefficient>,
        sigma_p: Vec<Coefficient>,
        g: Vec<Coefficient>,
        sigma_f: Vec<Coefficient>,
        r_bar: f64,
        eigen_bounds: (f64, f64),
    ) -> Result<Self> {
        if factor_dim == 0 || asset_dim == 0 {
            return Err(Error::InvalidParameter(
                "factor and asset dimensions must be positive".into(),
            ));
        }
        if mu.len() != asset_dim {
            return Err(Error::Dimension(format!(
                "mu has {} entries, expected {asset_dim}",
                mu.len()
            )));
        }
        if sigma_p.len() != asset_dim * asset_dim {
            return Err(Error::Dimension(format!(
                "sigma_p has {} entries, expected {}",
                sigma_p.len(),
                asset_dim * asset_dim
            )));
        }
        if g.len() != factor_dim {
            return Err(Error::Dimension(format!(
                "g has {} entries, expected {factor_dim}",
                g.len()
            )));
        }
        if sigma_f.len() != factor_dim * asset_dim {
            return Err(Error::Dimension(format!(
                "sigma_f has {} entries, expected {}",
                sigma_f.len(),
                factor_dim * asset_dim
            )));
        }
        if !(r_bar >= 0.0) || !r_bar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r_bar must be finite and non-negative, got {r_bar}"
            )));
        }
        if !(eigen_bounds.0 > 0.0) || !(eigen_bounds.1 >= eigen_bounds.0) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue window must satisfy 0 < mu1 <= mu2, got {eigen_bounds:?}"
            )));
        }
        let spec = ModelSpec {
            factor_dim,
            asset_dim,
            r,
            mu,
            sigma_p,
            g,
            sigma_f,
            r_bar,
            eigen_bounds,
        };
        for (name, coef) in spec.iter_coefficients() {
            if coef.max_axis() > factor_dim {
                return Err(Error::Dimension(format!(
                    "coefficient {name} references factor axis {} but n = {factor_dim}",
                    coef.max_axis()
                )));
            }
        }
        Ok(spec)
    }

    pub(crate) fn iter_coefficients(&self) -> impl Iterator<Item = (String, &Coefficient)> {
        std::iter::once(("r".to_string(), &self.r))
            .chain(self.mu.iter().enumerate().map(|(i, c)| (format!("mu[{i}]"), c)))
            .chain(
                self.sigma_p
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (format!("sigma_p[{i}]"), c)),
            )
            .chain(self.g.iter().enumerate().map(|(i, c)| (format!("g[{i}]"), c)))
            .chain(
                self.sigma_f
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (format!("sigma_f[{i}]"), c)),
            )
    }

    pub fn eval_r(&self, y: &[f64]) -> f64 {
        self.r.eval(y)
    }

    /// Reusable per-point coefficient buffers sized for this model.
    pub fn workspace(&self) -> CoefficientsAt {
        CoefficientsAt {
            r: 0.0,
            mu: vec![0.0; self.asset_dim],
            sigma_p: vec![0.0; self.asset_dim * self.asset_dim],
            sigma_f: vec![0.0; self.factor_dim * self.asset_dim],
            g: vec![0.0; self.factor_dim],
            theta: vec![0.0; self.asset_dim],
            scratch: vec![0.0; self.asset_dim * self.asset_dim],
        }
    }

    /// Evaluate every coefficient at `y`, including the market price of
    /// risk `theta = σ_p(y)^{-1} (μ(y) − r(y) 1)` via a pivoted linear
    /// solve (never an explicit inverse).
    pub fn eval_into(&self, y: &[f64], ws: &mut CoefficientsAt) -> Result<()> {
        debug_assert_eq!(y.len(), self.factor_dim);
        ws.r = self.r.eval(y);
        for (v, c) in ws.mu.iter_mut().zip(&self.mu) {
            *v = c.eval(y);
        }
        for (v, c) in ws.sigma_p.iter_mut().zip(&self.sigma_p) {
            *v = c.eval(y);
        }
        for (v, c) in ws.sigma_f.iter_mut().zip(&self.sigma_f) {
            *v = c.eval(y);
        }
        for (v, c) in ws.g.iter_mut().zip(&self.g) {
            *v = c.eval(y);
        }
        for i in 0..self.asset_dim {
            ws.theta[i] = ws.mu[i] - ws.r;
        }
        ws.scratch.copy_from_slice(&ws.sigma_p);
        linalg::solve_dense_in_place(&mut ws.scratch, &mut ws.theta, self.asset_dim).map_err(
            |_| Error::SingularMatrix {
                y: y.to_vec(),
                cond: f64::INFINITY,
            },
        )?;
        Ok(())
    }

    /// Market price of risk at `y`. Convenience wrapper over [`eval_into`].
    ///
    /// [`eval_into`]: ModelSpec::eval_into
    pub fn theta(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut ws = self.workspace();
        self.eval_into(y, &mut ws)?;
        Ok(ws.theta)
    }
}

/// All model coefficients evaluated at one factor point. Reused across
/// time steps to keep the simulation hot path allocation-free.
#[derive(Debug, Clone)]
pub struct CoefficientsAt {
    pub r: f64,
    pub mu: Vec<f64>,
    /// m×m row-major.
    pub sigma_p: Vec<f64>,
    /// n×m row-major.
    pub sigma_f: Vec<f64>,
    pub g: Vec<f64>,
    pub theta: Vec<f64>,
    scratch: Vec<f64>,
}

impl CoefficientsAt {
    /// `σ_f σ_f*` written into `out` (n×n row-major).
    pub fn factor_gram_into(&self, factor_dim: usize, asset_dim: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), factor_dim * factor_dim);
        for i in 0..factor_dim {
            for j in 0..factor_dim {
                let mut s = 0.0;
                for k in 0..asset_dim {
                    s += self.sigma_f[i * asset_dim + k] * self.sigma_f[j * asset_dim + k];
                }
                out[i * factor_dim + j] = s;
            }
        }
    }

    /// `(σ_f θ)_i = Σ_k σ_f[i,k] θ_k`, the drift tilt of the measure change.
    pub fn sigma_f_theta_into(&self, factor_dim: usize, asset_dim: usize, out: &mut [f64]) {
        for i in 0..factor_dim {
            let mut s = 0.0;
            for k in 0..asset_dim {
                s += self.sigma_f[i * asset_dim + k] * self.theta[k];
            }
            out[i] = s;
        }
    }

    /// `(σ_f* v)_k = Σ_i σ_f[i,k] v_i` for an n-vector `v` (e.g. Da/a).
    pub fn sigma_f_transpose_apply(&self, factor_dim: usize, asset_dim: usize, v: &[f64], out: &mut [f64]) {
        for k in 0..asset_dim {
            let mut s = 0.0;
            for i in 0..factor_dim {
                s += self.sigma_f[i * asset_dim + k] * v[i];
            }
            out[k] = s;
        }
    }
}

/// Exponential-utility preferences and the insurer's initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySpec {
    /// Risk aversion `α > 0` in `U(x) = −e^{−αx}`.
    pub risk_aversion: f64,
    /// Horizon `T > 0`.
    pub horizon: f64,
    /// Premium rate `c > 0` (wealth per unit time).
    pub premium_rate: f64,
    /// Initial surplus.
    pub initial_surplus: f64,
    /// Initial factor value `y0 ∈ ℝⁿ`.
    pub initial_factor: Vec<f64>,
}

impl UtilitySpec {
    pub fn new(
        risk_aversion: f64,
        horizon: f64,
        premium_rate: f64,
        initial_surplus: f64,
        initial_factor: Vec<f64>,
    ) -> Result<Self> {
        if !(risk_aversion > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "risk aversion must be positive, got {risk_aversion}"
            )));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if !(premium_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "premium rate must be positive, got {premium_rate}"
            )));
        }
        Ok(UtilitySpec {
            risk_aversion,
            horizon,
            premium_rate,
            initial_surplus,
            initial_factor,
        })
    }

    pub fn utility(&self, x: f64) -> f64 {
        -(-self.risk_aversion * x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn scalar_model(r: f64, mu: f64, sigma_p: f64) -> ModelSpec {
        ModelSpec::new(
            1,
            1,
            Coefficient::constant(r),
            vec![Coefficient::constant(mu)],
            vec![Coefficient::constant(sigma_p)],
            vec![Coefficient::OuDrift {
                kappa: 1.0,
                mean: 0.0,
                axis: 0,
            }],
            vec![Coefficient::constant(0.3)],
            r.max(0.0),
            (1e-3, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn theta_scalar_case() {
        // (0.08 − 0.02) / 0.2 = 0.3 at any y
        let model = scalar_model(0.02, 0.08, 0.2);
        for y in [-1.0, 0.0, 2.5] {
            let theta = model.theta(&[y]).unwrap();
            assert!((theta[0] - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_vanishes_when_mu_equals_r() {
        let model = scalar_model(0.05, 0.05, 0.2);
        let theta = model.theta(&[0.7]).unwrap();
        assert_eq!(theta[0], 0.0);
    }

    #[test]
    fn theta_2x2_matches_explicit_inverse() {
        // σ_p = diag(0.2, 0.3), μ − r·1 = (0.04, 0.06): solve vs. the
        // explicit diagonal inverse gives (0.2, 0.2).
        let model = ModelSpec::new(
            1,
            2,
            Coefficient::constant(0.02),
            vec![Coefficient::constant(0.06), Coefficient::constant(0.08)],
            vec![
                Coefficient::constant(0.2),
                Coefficient::constant(0.0),
                Coefficient::constant(0.0),
                Coefficient::constant(0.3),
            ],
            vec![Coefficient::OuDrift {
                kappa: 1.0,
                mean: 0.0,
                axis: 0,
            }],
            vec![Coefficient::constant(0.2), Coefficient::constant(0.1)],
            0.02,
            (1e-3, 1.0),
        )
        .unwrap();
        let theta = model.theta(&[0.0]).unwrap();
        let explicit = [0.04 / 0.2, 0.06 / 0.3];
        assert!((theta[0] - explicit[0]).abs() < 1e-14);
        assert!((theta[1] - explicit[1]).abs() < 1e-14);
    }

    #[test]
    fn theta_reports_singular_sigma_p() {
        let model = ModelSpec::new(
            1,
            2,
            Coefficient::constant(0.02),
            vec![Coefficient::constant(0.06), Coefficient::constant(0.08)],
            vec![
                // Zero row: singular by construction.
                Coefficient::constant(0.0),
                Coefficient::constant(0.0),
                Coefficient::constant(0.1),
                Coefficient::constant(0.3),
            ],
            vec![Coefficient::OuDrift {
                kappa: 1.0,
                mean: 0.0,
                axis: 0,
            }],
            vec![Coefficient::constant(0.2), Coefficient::constant(0.1)],
            0.02,
            (1e-3, 1.0),
        )
        .unwrap();
        assert!(matches!(
            model.theta(&[0.0]),
            Err(Error::SingularMatrix { .. })
        ));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// theta(μ + σ_p k, r) = theta(μ, r) + k: linearity of the solve.
        #[test]
        fn theta_shift_covariance(
            mu in -0.5f64..0.5,
            r in 0.0f64..0.1,
            sigma in 0.05f64..0.9,
            shift in -2.0f64..2.0,
        ) {
            let base = tests::scalar_model(r, mu, sigma);
            // μ' = μ + σ_p·k with the same r.
            let shifted = tests::scalar_model(r, mu + sigma * shift, sigma);
            let t0 = base.theta(&[0.3]).unwrap()[0];
            let t1 = shifted.theta(&[0.3]).unwrap()[0];
            prop_assert!((t1 - (t0 + shift)).abs() < 1e-10);
        }

        /// psi is strictly increasing and convex on (0, u_max).
        #[test]
        fn psi_increasing_convex(beta in 2.0f64..20.0, lambda in 0.2f64..3.0) {
            let claims = ClaimModel::new(lambda, ClaimDistribution::Exponential { beta }).unwrap();
            let us: Vec<f64> = (1..40).map(|i| i as f64 / 40.0 * beta * 0.95).collect();
            let vals: Vec<f64> = us.iter().map(|&u| claims.psi(u).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            for w in vals.windows(3) {
                // Midpoint convexity on an equally spaced grid.
                prop_assert!(w[0] + w[2] >= 2.0 * w[1] - 1e-12);
            }
        }
    }
}
