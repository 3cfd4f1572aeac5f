//! Closed catalog of coefficient families.
//!
//! Coefficients are parametric rather than arbitrary callables so that global
//! Lipschitz continuity and linear-growth derivatives (assumption set entry
//! A1) hold by construction and first derivatives are analytic.

/// A scalar function of the factor `y ∈ ℝⁿ` drawn from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    /// `f(y) = value`
    Constant { value: f64 },
    /// `f(y) = base + scale · tanh(weights·y + offset)` — affine saturated.
    TanhAffine {
        base: f64,
        scale: f64,
        offset: f64,
        weights: Vec<f64>,
    },
    /// `f(y) = −kappa · (y[axis] − mean)` — mean-reverting (OU) drift entry.
    OuDrift { kappa: f64, mean: f64, axis: usize },
}

impl Coefficient {
    pub fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::TanhAffine {
                base,
                scale,
                offset,
                weights,
            } => {
                let z: f64 = weights.iter().zip(y).map(|(w, yi)| w * yi).sum::<f64>() + offset;
                base + scale * z.tanh()
            }
            Coefficient::OuDrift { kappa, mean, axis } => -kappa * (y[*axis] - mean),
        }
    }

    /// Analytic gradient with respect to `y`, written into `out`.
    pub fn grad_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match self {
            Coefficient::Constant { .. } => {}
            Coefficient::TanhAffine {
                scale,
                offset,
                weights,
                ..
            } => {
                let z: f64 = weights.iter().zip(y).map(|(w, yi)| w * yi).sum::<f64>() + offset;
                let sech2 = 1.0 - z.tanh().powi(2);
                for (o, w) in out.iter_mut().zip(weights) {
                    *o = scale * sech2 * w;
                }
            }
            Coefficient::OuDrift { kappa, axis, .. } => {
                out[*axis] = -kappa;
            }
        }
    }

    /// Global Lipschitz constant of the family (supremum of |grad|).
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            Coefficient::Constant { .. } => 0.0,
            Coefficient::TanhAffine { scale, weights, .. } => {
                let wnorm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                scale.abs() * wnorm
            }
            Coefficient::OuDrift { kappa, .. } => kappa.abs(),
        }
    }

    /// Number of factor dimensions this entry references. Used by
    /// dimension checks at model construction.
    pub fn max_axis(&self) -> usize {
        match self {
            Coefficient::Constant { .. } => 0,
            Coefficient::TanhAffine { weights, .. } => weights.len(),
            Coefficient::OuDrift { axis, .. } => axis + 1,
        }
    }
}
