//! Benchmark model presets used by the default config, the test suites,
//! and the browser demo.

use crate::model::{ClaimDistribution, ClaimModel, Coefficient, ModelSpec, UtilitySpec};

/// Constant-coefficient market on a one-dimensional OU factor the
/// coefficients ignore: r = 0.02, μ = 0.08, σ_p = 0.2 (so θ = 0.3),
/// Exp(10) claims at unit intensity, α = 1, T = 1, c = 1.5, x0 = 0.
/// Everything has a closed form, which makes it the calibration anchor.
pub fn constant_market() -> (ModelSpec, ClaimModel, UtilitySpec) {
    let model = ModelSpec::new(
        1,
        1,
        Coefficient::constant(0.02),
        vec![Coefficient::constant(0.08)],
        vec![Coefficient::constant(0.2)],
        vec![Coefficient::OuDrift {
            kappa: 1.0,
            mean: 0.0,
            axis: 0,
        }],
        vec![Coefficient::constant(0.3)],
        0.02,
        (0.01, 1.0),
    )
    .expect("constant market preset");
    let claims = ClaimModel::new(1.0, ClaimDistribution::Exponential { beta: 10.0 })
        .expect("constant market claims");
    let utility = UtilitySpec::new(1.0, 1.0, 1.5, 0.0, vec![0.0]).expect("constant market utility");
    (model, claims, utility)
}

/// Factor-dependent market: OU factor `g = −y`, `σ_f = 0.3`,
/// `r(y) = 0.03 (1 + tanh y)/2`, `μ(y) = 0.05 + 0.02 tanh y`, `σ_p = 0.2`,
/// same claims and preferences as the constant market.
pub fn factor_market() -> (ModelSpec, ClaimModel, UtilitySpec) {
    let model = ModelSpec::new(
        1,
        1,
        Coefficient::TanhAffine {
            base: 0.015,
            scale: 0.015,
            offset: 0.0,
            weights: vec![1.0],
        },
        vec![Coefficient::TanhAffine {
            base: 0.05,
            scale: 0.02,
            offset: 0.0,
            weights: vec![1.0],
        }],
        vec![Coefficient::constant(0.2)],
        vec![Coefficient::OuDrift {
            kappa: 1.0,
            mean: 0.0,
            axis: 0,
        }],
        vec![Coefficient::constant(0.3)],
        0.03,
        (0.01, 1.0),
    )
    .expect("factor market preset");
    let claims = ClaimModel::new(1.0, ClaimDistribution::Exponential { beta: 10.0 })
        .expect("factor market claims");
    let utility = UtilitySpec::new(1.0, 1.0, 1.5, 0.0, vec![0.0]).expect("factor market utility");
    (model, claims, utility)
}

/// Two-factor variant for exercising the 2-D solver: independent OU
/// factors, rate driven by the first, drift by the second.
pub fn two_factor_market() -> (ModelSpec, ClaimModel, UtilitySpec) {
    let model = ModelSpec::new(
        2,
        2,
        Coefficient::TanhAffine {
            base: 0.015,
            scale: 0.015,
            offset: 0.0,
            weights: vec![1.0, 0.0],
        },
        vec![
            Coefficient::TanhAffine {
                base: 0.05,
                scale: 0.02,
                offset: 0.0,
                weights: vec![0.0, 1.0],
            },
            Coefficient::constant(0.06),
        ],
        vec![
            Coefficient::constant(0.2),
            Coefficient::constant(0.0),
            Coefficient::constant(0.05),
            Coefficient::constant(0.25),
        ],
        vec![
            Coefficient::OuDrift {
                kappa: 1.0,
                mean: 0.0,
                axis: 0,
            },
            Coefficient::OuDrift {
                kappa: 1.2,
                mean: 0.0,
                axis: 1,
            },
        ],
        vec![
            Coefficient::constant(0.3),
            Coefficient::constant(0.0),
            Coefficient::constant(0.1),
            Coefficient::constant(0.28),
        ],
        0.03,
        (1e-3, 1.0),
    )
    .expect("two factor preset");
    let claims = ClaimModel::new(1.0, ClaimDistribution::Exponential { beta: 10.0 })
        .expect("two factor claims");
    let utility =
        UtilitySpec::new(1.0, 1.0, 1.5, 0.0, vec![0.0, 0.0]).expect("two factor utility");
    (model, claims, utility)
}
