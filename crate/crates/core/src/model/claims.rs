//! Claim-arrival and claim-size model with its exponential-moment machinery.

use rand::Rng;

use crate::error::{Error, Result};

/// Claim-size law. All supported laws are non-negative with finite mean.
#[derive(Debug, Clone, PartialEq)]
pub enum ClaimDistribution {
    /// Density `β e^{−βz}` on `z > 0`; mean `1/β`.
    Exponential { beta: f64 },
    /// Point mass at `size`.
    Deterministic { size: f64 },
    /// Atoms `(size_i, prob_i)`; probabilities must sum to one.
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
}

/// Compound-Poisson claim stream: intensity `lambda`, i.i.d. sizes from
/// `dist`. `u_max` is the abscissa below which `∫ e^{uz} ν(dz)` is finite;
/// it is stored explicitly so `psi` can refuse divergent arguments instead
/// of silently returning garbage. `lambda = 0` represents a claim-free
/// book (used by degenerate checks).
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimModel {
    pub lambda: f64,
    pub dist: ClaimDistribution,
}

impl ClaimModel {
    pub fn new(lambda: f64, dist: ClaimDistribution) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "claim intensity must be non-negative and finite, got {lambda}"
            )));
        }
        match &dist {
            ClaimDistribution::Exponential { beta } => {
                if !(*beta > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "exponential claim rate must be positive, got {beta}"
                    )));
                }
            }
            ClaimDistribution::Deterministic { size } => {
                if *size < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "claim sizes must be non-negative, got {size}"
                    )));
                }
            }
            ClaimDistribution::FiniteDiscrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidParameter(
                        "discrete claim law needs at least one atom".into(),
                    ));
                }
                let total: f64 = atoms.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "discrete claim probabilities sum to {total}, expected 1"
                    )));
                }
                if atoms.iter().any(|(z, p)| *z < 0.0 || *p < 0.0) {
                    return Err(Error::InvalidParameter(
                        "discrete claim atoms must have non-negative size and probability".into(),
                    ));
                }
            }
        }
        Ok(ClaimModel { lambda, dist })
    }

    /// Supremum of `u` with `∫ e^{uz} ν(dz) < ∞`: `β` for the exponential
    /// law, `+∞` for bounded laws.
    pub fn u_max(&self) -> f64 {
        match &self.dist {
            ClaimDistribution::Exponential { beta } => *beta,
            ClaimDistribution::Deterministic { .. } | ClaimDistribution::FiniteDiscrete { .. } => {
                f64::INFINITY
            }
        }
    }

    /// Jump-compensator integral `ψ(u) = λ ∫ (e^{uz} − 1) ν(dz)`, in closed
    /// form per family. Errors for `u ≥ u_max` (moment-condition breach).
    pub fn psi(&self, u: f64) -> Result<f64> {
        let u_max = self.u_max();
        if u >= u_max {
            return Err(Error::MomentDomain { u, u_max });
        }
        let integral = match &self.dist {
            ClaimDistribution::Exponential { beta } => u / (beta - u),
            ClaimDistribution::Deterministic { size } => (u * size).exp_m1(),
            ClaimDistribution::FiniteDiscrete { atoms } => atoms
                .iter()
                .map(|(z, p)| p * (u * z).exp_m1())
                .sum::<f64>(),
        };
        Ok(self.lambda * integral)
    }

    /// Mean claim size `∫ z ν(dz)`.
    pub fn mean_claim(&self) -> f64 {
        match &self.dist {
            ClaimDistribution::Exponential { beta } => 1.0 / beta,
            ClaimDistribution::Deterministic { size } => *size,
            ClaimDistribution::FiniteDiscrete { atoms } => {
                atoms.iter().map(|(z, p)| z * p).sum::<f64>()
            }
        }
    }

    /// Draw one claim size.
    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.dist {
            ClaimDistribution::Exponential { beta } => {
                let u: f64 = rng.gen::<f64>();
                // Inverse CDF; guard the u = 0 corner.
                -(1.0 - u).max(f64::MIN_POSITIVE).ln() / beta
            }
            ClaimDistribution::Deterministic { size } => *size,
            ClaimDistribution::FiniteDiscrete { atoms } => {
                let mut u: f64 = rng.gen::<f64>();
                for (z, p) in atoms {
                    if u < *p {
                        return *z;
                    }
                    u -= p;
                }
                atoms.last().map(|(z, _)| *z).unwrap_or(0.0)
            }
        }
    }
}
