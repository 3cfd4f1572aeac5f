use super::*;
use crate::model::{ClaimDistribution, ClaimModel, Coefficient, ModelSpec, UtilitySpec};
use crate::oracles;
use crate::presets;

fn default_grid(model: &ModelSpec, utility: &UtilitySpec) -> GridSpec {
    GridSpec::defaults_for(model, utility).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// Model with zero market price of risk and zero rate; premium chosen so
/// that `c·α = ψ(α)` cancels the claim term.
fn balanced_model() -> (ModelSpec, ClaimModel, UtilitySpec) {
    let model = ModelSpec::new(
        1,
        1,
        Coefficient::constant(0.0),
        vec![Coefficient::constant(0.0)],
        vec![Coefficient::constant(0.2)],
        vec![Coefficient::OuDrift {
            kappa: 1.0,
            mean: 0.0,
            axis: 0,
        }],
        vec![Coefficient::constant(0.3)],
        0.0,
        (0.01, 1.0),
    )
    .unwrap();
    let claims = ClaimModel::new(1.0, ClaimDistribution::Exponential { beta: 10.0 }).unwrap();
    // ψ(1) = 1/(10−1); setting c to the same value kills the b source.
    let utility = UtilitySpec::new(1.0, 1.0, 1.0 / 9.0, 0.0, vec![0.0]).unwrap();
    (model, claims, utility)
}

#[test]
fn a_hat_constant_rate_reduces_to_discount_ode() {
    let (model, _claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let expect = (-0.02f64).exp();
    let (lo, hi) = a_hat.min_max();
    assert!(hi - lo >= 0.0);
    for node in 0..grid.n_nodes() {
        let v = a_hat.node_value(0, node);
        assert!((v - expect).abs() / expect < 1e-5, "{v} vs {expect}");
    }
    // Exactly y-independent: every row of the stencil sums to the pure
    // reaction term on constants.
    let spread = (0..grid.n_nodes())
        .map(|n| a_hat.node_value(0, n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    assert!(spread.1 - spread.0 < 1e-10);
}

#[test]
fn a_hat_zero_rate_is_flat_inverse_alpha() {
    let (model, _claims, _) = balanced_model();
    let utility = UtilitySpec::new(2.0, 1.0, 1.0, 0.0, vec![0.0]).unwrap();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let (lo, hi) = a_hat.min_max();
    assert_eq!(lo, 0.5);
    assert_eq!(hi, 0.5);
}

#[test]
fn a_from_a_hat_is_reciprocal_with_exact_terminal() {
    let (model, _claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    for node in 0..grid.n_nodes() {
        assert_eq!(a.node_value(grid.time_steps, node), 1.0);
        let k = grid.time_steps / 2;
        let prod = a.node_value(k, node) * a_hat.node_value(k, node);
        assert!((prod - 1.0).abs() < 1e-15);
    }
    // A4 bounds: α ≤ a ≤ α e^{r̄ T}.
    let (lo, hi) = a.min_max();
    assert!(lo >= 1.0 - 1e-12);
    assert!(hi <= (0.02f64).exp() + 1e-9);
}

#[test]
fn constant_model_a_matches_closed_form() {
    let (model, _claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    let v = a.value_at(0.0, &[0.0]).unwrap();
    let expect = oracles::a_constant_model(1.0, 0.02, 1.0, 0.0);
    assert!(
        (v - expect).abs() / expect <= 1e-4,
        "a(0) = {v}, closed form {expect}"
    );
}

#[test]
fn constant_model_b_matches_quadrature_oracle() {
    let (model, claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    let b = solve_b(&model, &claims, &utility, &a, &opts()).unwrap();
    let oracle = oracles::b_constant_model(1.0, 0.02, 0.3, 1.5, &claims, 1.0, 0.0);
    let v = b.value_at(0.0, &[0.0]).unwrap();
    assert!(
        (v - oracle).abs() / oracle.abs() <= 1e-4,
        "b(0) = {v}, quadrature {oracle}"
    );
    // Halfway check too: the whole profile should track the integral.
    let oracle_mid = oracles::b_constant_model(1.0, 0.02, 0.3, 1.5, &claims, 1.0, 0.5);
    let v_mid = b.value_at(0.5, &[0.0]).unwrap();
    assert!((v_mid - oracle_mid).abs() / oracle_mid.abs() <= 1e-4);
}

#[test]
fn constant_model_b_without_claims_matches_closed_form() {
    let (model, _claims, utility) = presets::constant_market();
    let claims = ClaimModel::new(0.0, ClaimDistribution::Exponential { beta: 10.0 }).unwrap();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    let b = solve_b(&model, &claims, &utility, &a, &opts()).unwrap();
    // ∫_0^T [θ²/2 + c e^{r(T−s)}] ds = 0.045 T + (c/r)(e^{rT} − 1)
    let expect = 0.045 + 1.5 / 0.02 * ((0.02f64).exp() - 1.0);
    let v = b.value_at(0.0, &[0.0]).unwrap();
    assert!((v - expect).abs() / expect <= 1e-4, "{v} vs {expect}");
}

#[test]
fn b_vanishes_when_premium_balances_claims() {
    let (model, claims, utility) = balanced_model();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    let b = solve_b(&model, &claims, &utility, &a, &opts()).unwrap();
    let (lo, hi) = b.min_max();
    assert!(lo.abs() < 1e-14 && hi.abs() < 1e-14, "b in [{lo}, {hi}]");
}

#[test]
fn b_rejects_moment_breach_on_grid() {
    let (model, _claims, utility) = presets::constant_market();
    // a reaches e^{0.02} ≈ 1.0202 > β: psi(a) diverges inside the grid.
    let claims = ClaimModel::new(1.0, ClaimDistribution::Exponential { beta: 1.01 }).unwrap();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    let err = solve_b(&model, &claims, &utility, &a, &opts());
    assert!(matches!(err, Err(crate::Error::MomentDomain { .. })));
}

#[test]
fn eta_constant_rate_closed_form() {
    let (model, _claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let eta = solve_eta(&model, &utility, &grid, &opts()).unwrap();
    // η(t) = α(1 − e^{r(T−t)})
    let expect = 1.0 - (0.02f64).exp();
    let v = eta.value_at(0.0, &[0.0]).unwrap();
    assert!((v - expect).abs() < 1e-5, "{v} vs {expect}");
    for node in 0..grid.n_nodes() {
        assert_eq!(eta.node_value(grid.time_steps, node), 0.0);
    }
    let (_, hi) = eta.min_max();
    assert!(hi < utility.risk_aversion);
}

#[test]
fn eta_zero_rate_is_zero() {
    let (model, _claims, utility) = balanced_model();
    let grid = default_grid(&model, &utility);
    let eta = solve_eta(&model, &utility, &grid, &opts()).unwrap();
    let (lo, hi) = eta.min_max();
    assert_eq!(lo, 0.0);
    assert_eq!(hi, 0.0);
}

#[test]
fn phi_constant_model_matches_identity_oracle() {
    let (model, claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let eta = solve_eta(&model, &utility, &grid, &opts()).unwrap();
    let phi = solve_phi(&model, &claims, &utility, &eta, &opts()).unwrap();
    let oracle = oracles::phi_constant_model(1.0, 0.02, 0.3, 1.5, &claims, 1.0, 0.0);
    let v = phi.value_at(0.0, &[0.0]).unwrap();
    assert!(
        (v - oracle).abs() <= 1e-4 * oracle.abs().max(1.0),
        "phi(0) = {v}, oracle {oracle}"
    );
}

#[test]
fn phi_vanishes_in_the_balanced_degenerate_case() {
    let (model, claims, utility) = balanced_model();
    let grid = default_grid(&model, &utility);
    let eta = solve_eta(&model, &utility, &grid, &opts()).unwrap();
    let phi = solve_phi(&model, &claims, &utility, &eta, &opts()).unwrap();
    let (lo, hi) = phi.min_max();
    assert!(lo.abs() < 1e-14 && hi.abs() < 1e-14);
}

#[test]
fn factor_market_identities_hold_on_interior() {
    let (model, claims, utility) = presets::factor_market();
    let grid = GridSpec::new(
        crate::model::envelope_bounds(&model, &utility, 5.0),
        121,
        120,
        utility.horizon,
    )
    .unwrap();
    let s = solve_all(&model, &claims, &utility, &grid, &opts()).unwrap();
    let alpha = utility.risk_aversion;
    let eta_gap = interior_max(&grid, |k, node| {
        (s.eta.node_value(k, node) - (alpha - s.a.node_value(k, node))).abs()
    });
    assert!(eta_gap <= 1e-3 * alpha, "eta identity gap {eta_gap}");
    let phi_gap = interior_max(&grid, |k, node| {
        let via_hjb = (s.a.node_value(k, node) / alpha).ln() - s.b.node_value(k, node);
        (s.phi.node_value(k, node) - via_hjb).abs()
    });
    assert!(phi_gap <= 1e-3, "phi identity gap {phi_gap}");
}

#[test]
fn factor_market_bounds_and_monotonicity() {
    let (model, claims, utility) = presets::factor_market();
    let grid = default_grid(&model, &utility);
    let s = solve_all(&model, &claims, &utility, &grid, &opts()).unwrap();
    let alpha = utility.risk_aversion;
    let cap = alpha * (model.r_bar * utility.horizon).exp();
    let (lo, hi) = s.a.min_max();
    assert!(lo >= alpha - 1e-9, "a min {lo}");
    assert!(hi <= cap + 1e-6, "a max {hi} vs cap {cap}");
    assert!(max_time_increase(&s.a) <= 1e-8);
    let growth = gradient_growth_constant(&s.a);
    assert!(growth.is_finite() && growth >= 0.0);
}

#[test]
fn semilinear_residual_is_small() {
    let (model, _claims, utility) = presets::factor_market();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
    let (max_abs, rms) = semilinear_residual_a(&model, &a).unwrap();
    assert!(max_abs < 1e-2, "max residual {max_abs}");
    assert!(rms < 1e-3, "rms residual {rms}");
}

#[test]
fn refinement_halves_the_constant_model_error() {
    let (model, _claims, utility) = presets::constant_market();
    let exact = oracles::a_constant_model(1.0, 0.02, 1.0, 0.0);
    let mut errors = Vec::new();
    for (points, steps) in [(51, 50), (101, 100), (201, 200)] {
        let grid = GridSpec::new(
            crate::model::envelope_bounds(&model, &utility, 5.0),
            points,
            steps,
            utility.horizon,
        )
        .unwrap();
        let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
        let a = a_from_a_hat(&a_hat, utility.risk_aversion).unwrap();
        errors.push((a.value_at(0.0, &[0.0]).unwrap() - exact).abs());
    }
    // First-order in dt: each halving should shave at least ~2x. Allow a
    // whisker below two for the second-order correction term.
    assert!(errors[0] / errors[1] >= 1.9, "{errors:?}");
    assert!(errors[1] / errors[2] >= 1.9, "{errors:?}");
}

#[test]
fn two_factor_surfaces_solve_and_satisfy_bounds() {
    let (model, claims, utility) = presets::two_factor_market();
    let grid = GridSpec::new(
        crate::model::envelope_bounds(&model, &utility, 5.0),
        41,
        60,
        utility.horizon,
    )
    .unwrap();
    let s = solve_all(&model, &claims, &utility, &grid, &opts()).unwrap();
    let alpha = utility.risk_aversion;
    let cap = alpha * (model.r_bar * utility.horizon).exp();
    let (lo, hi) = s.a.min_max();
    assert!(lo >= alpha - 1e-6, "a min {lo}");
    assert!(hi <= cap + 1e-5, "a max {hi}");
    assert!(max_time_increase(&s.a) <= 1e-8);
    let eta_gap = interior_max(&grid, |k, node| {
        (s.eta.node_value(k, node) - (alpha - s.a.node_value(k, node))).abs()
    });
    assert!(eta_gap <= 1e-3 * alpha);
    let phi_gap = interior_max(&grid, |k, node| {
        let via_hjb = (s.a.node_value(k, node) / alpha).ln() - s.b.node_value(k, node);
        (s.phi.node_value(k, node) - via_hjb).abs()
    });
    assert!(phi_gap <= 2e-3, "2-D phi identity gap {phi_gap}");
}

#[test]
fn gradient_op_checks_domain() {
    let (model, _claims, utility) = presets::constant_market();
    let grid = default_grid(&model, &utility);
    let a_hat = solve_a_hat(&model, &utility, &grid, &opts()).unwrap();
    assert!(gradient(&a_hat, 0.5, &[0.0]).is_ok());
    assert!(gradient(&a_hat, 0.5, &[99.0]).is_err());
}
