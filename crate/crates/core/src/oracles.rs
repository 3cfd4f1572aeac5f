//! Independent numerical oracles for the test suites (feature `oracles`).
//!
//! Everything here is deliberately decoupled from the PDE and Monte Carlo
//! implementation paths: plain quadrature of one-dimensional integrals and
//! textbook closed forms. Tests freeze expected values computed by these
//! routines and compare the engine against them.

use crate::model::ClaimModel;

/// Abscissas/weights of the 10-point Gauss–Legendre rule on [-1, 1].
const GL_X: [f64; 10] = [
    -0.9739065285171717,
    -0.8650633666889845,
    -0.6794095682990244,
    -0.4333953941292472,
    -0.1488743389816312,
    0.1488743389816312,
    0.4333953941292472,
    0.6794095682990244,
    0.8650633666889845,
    0.9739065285171717,
];
const GL_W: [f64; 10] = [
    0.0666713443086881,
    0.1494513491505806,
    0.2190863625159820,
    0.2692667193099963,
    0.2955242247147529,
    0.2955242247147529,
    0.2692667193099963,
    0.2190863625159820,
    0.1494513491505806,
    0.0666713443086881,
];

/// Composite 10-point Gauss–Legendre quadrature of `f` over `[a, b]`.
/// With a few hundred panels this is ~1e-13 accurate on smooth integrands.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for i in 0..10 {
            s += GL_W[i] * f(mid + half * GL_X[i]);
        }
        total += s * half;
    }
    total
}

/// `∫ (e^{uz} − 1) ν(dz)` for the exponential claim law by direct
/// quadrature: truncates the tail where `(β−u)z = 40` (mass ~ e^{-40}).
pub fn exp_claim_moment_integral(beta: f64, u: f64) -> f64 {
    assert!(u < beta);
    let z_max = 40.0 / (beta - u).min(beta);
    integrate(
        |z| ((u * z).exp() - 1.0) * beta * (-beta * z).exp(),
        0.0,
        z_max,
        400,
    )
}

/// Constant-coefficient `a(t) = α e^{r0 (T − t)}`.
pub fn a_constant_model(alpha: f64, r0: f64, horizon: f64, t: f64) -> f64 {
    alpha * (r0 * (horizon - t)).exp()
}

/// Constant-coefficient `b(t) = ∫_t^T [θ²/2 + c·a(s) − ψ(a(s))] ds` by
/// quadrature. `ψ` uses the claim model's closed form, which is itself
/// checked against direct quadrature elsewhere.
pub fn b_constant_model(
    alpha: f64,
    r0: f64,
    theta: f64,
    premium_rate: f64,
    claims: &ClaimModel,
    horizon: f64,
    t: f64,
) -> f64 {
    integrate(
        |s| {
            let a = a_constant_model(alpha, r0, horizon, s);
            0.5 * theta * theta + premium_rate * a - claims.psi(a).expect("psi domain")
        },
        t,
        horizon,
        400,
    )
}

/// Constant-coefficient `φ(t) = log(a(t)/α) − b(t)`.
pub fn phi_constant_model(
    alpha: f64,
    r0: f64,
    theta: f64,
    premium_rate: f64,
    claims: &ClaimModel,
    horizon: f64,
    t: f64,
) -> f64 {
    (a_constant_model(alpha, r0, horizon, t) / alpha).ln()
        - b_constant_model(alpha, r0, theta, premium_rate, claims, horizon, t)
}

/// Exact mean and variance of an OU endpoint:
/// `dY = −κ(Y − m̄) dt + σ dW`, started at `y0`, horizon `T`.
pub fn ou_moments(kappa: f64, mean: f64, sigma: f64, y0: f64, horizon: f64) -> (f64, f64) {
    let decay = (-kappa * horizon).exp();
    let m = mean + (y0 - mean) * decay;
    let v = sigma * sigma * (1.0 - (-2.0 * kappa * horizon).exp()) / (2.0 * kappa);
    (m, v)
}
