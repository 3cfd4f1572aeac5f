//! Euler–Maruyama factor simulation under the four measures.
//!
//! Measure-specific drifts:
//!
//! ```text
//! P:              g(y)
//! P_hat, P_hat_N: g(y) − σ_f(y) θ(y)
//! P_bar:          g(y) − σ_f(y) θ(y) − σ_f σ_f*(y) D(log a)(t, y)
//! ```
//!
//! The `P_bar` gradient lookup clamps paths onto the solved grid and
//! aborts when more than the clamp budget of steps needed it.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::sim::rng::diffusion_rng;
use crate::sim::{collect_pairs, MeasureTag, PathBundle, PathConfig, PathData, CLAMP_BUDGET};

pub fn simulate_factor(
    model: &ModelSpec,
    measure: &MeasureTag,
    t0: f64,
    y0: &[f64],
    horizon: f64,
    cfg: &PathConfig,
) -> Result<PathBundle> {
    simulate_factor_range(model, measure, t0, y0, horizon, cfg, 0, cfg.n_pairs())
}

/// Simulate only the pair units in `[pair_lo, pair_hi)`. Streamed
/// estimators process ranges in chunks; draws depend on the pair index
/// alone, so chunking never changes them.
#[allow(clippy::too_many_arguments)]
pub fn simulate_factor_range(
    model: &ModelSpec,
    measure: &MeasureTag,
    t0: f64,
    y0: &[f64],
    horizon: f64,
    cfg: &PathConfig,
    pair_lo: u64,
    pair_hi: u64,
) -> Result<PathBundle> {
    let steps = cfg.validate(horizon)?;
    let dt = horizon / steps as f64;
    let n = model.factor_dim;
    let m = model.asset_dim;
    if y0.len() != n {
        return Err(Error::Dimension(format!(
            "y0 has {} entries, expected {n}",
            y0.len()
        )));
    }
    measure.check_surface()?;
    if let MeasureTag::PBar(surface) = measure {
        if surface.grid().dim() != n {
            return Err(Error::Dimension(
                "P_bar surface dimension does not match the model".into(),
            ));
        }
    }

    let results = collect_pairs(pair_lo, pair_hi, |pair| {
        let mut rng = diffusion_rng(cfg.seed, pair);
        let mut dw = vec![0.0; steps * m];
        for v in dw.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z * dt.sqrt();
        }
        let base = euler_path(model, measure, t0, y0, dt, steps, &dw)?;
        let mut out = Vec::with_capacity(2);
        if cfg.antithetic {
            let flipped: Vec<f64> = dw.iter().map(|v| -v).collect();
            let partner = euler_path(model, measure, t0, y0, dt, steps, &flipped)?;
            out.push(base);
            out.push(partner);
        } else {
            out.push(base);
        }
        Ok(out)
    })?;

    let mut clamped_steps = 0;
    let mut paths = Vec::with_capacity(results.len());
    for (path, clamps) in results {
        clamped_steps += clamps;
        paths.push(path);
    }
    let total_steps = (paths.len() * steps) as u64;
    if clamped_steps as f64 > CLAMP_BUDGET * total_steps as f64 {
        return Err(Error::DomainTooSmall {
            clamped: clamped_steps,
            total: total_steps,
            budget_percent: CLAMP_BUDGET * 100.0,
        });
    }

    Ok(PathBundle {
        measure: measure.clone(),
        t0,
        horizon,
        dt,
        steps,
        factor_dim: n,
        asset_dim: m,
        seed: cfg.seed,
        antithetic: cfg.antithetic,
        pair_offset: pair_lo,
        clamped_steps,
        paths,
    })
}

/// One Euler path from prepared Brownian increments. Returns the path and
/// the number of clamped gradient lookups.
fn euler_path(
    model: &ModelSpec,
    measure: &MeasureTag,
    t0: f64,
    y0: &[f64],
    dt: f64,
    steps: usize,
    dw: &[f64],
) -> Result<(PathData, u64)> {
    let n = model.factor_dim;
    let m = model.asset_dim;
    let mut ws = model.workspace();
    let mut factor = vec![0.0; (steps + 1) * n];
    factor[..n].copy_from_slice(y0);
    let mut log_weight = 0.0;
    let mut clamps = 0u64;
    let mut h = vec![0.0; m];
    let mut tilt = vec![0.0; n];
    let mut dlog = vec![0.0; n];
    let mut y_clamped = vec![0.0; n];
    let mut gram = vec![0.0; n * n];

    for k in 0..steps {
        let t = t0 + dt * k as f64;
        let (head, tail) = factor.split_at_mut((k + 1) * n);
        let y = &head[k * n..];
        model.eval_into(y, &mut ws)?;
        let dwk = &dw[k * m..(k + 1) * m];

        // Drift-change magnitude H for the density d(measure)/dP.
        let weighted = !matches!(measure, MeasureTag::P);
        match measure {
            MeasureTag::P => {
                tilt.iter_mut().for_each(|v| *v = 0.0);
                h.iter_mut().for_each(|v| *v = 0.0);
            }
            MeasureTag::PHat | MeasureTag::PHatN(_) => {
                ws.sigma_f_theta_into(n, m, &mut tilt);
                h.copy_from_slice(&ws.theta);
            }
            MeasureTag::PBar(surface) => {
                y_clamped.copy_from_slice(y);
                if surface.grid().clamp(&mut y_clamped) {
                    clamps += 1;
                }
                surface.log_gradient_at(t, &y_clamped, &mut dlog)?;
                ws.factor_gram_into(n, m, &mut gram);
                ws.sigma_f_theta_into(n, m, &mut tilt);
                for i in 0..n {
                    let mut extra = 0.0;
                    for j in 0..n {
                        extra += gram[i * n + j] * dlog[j];
                    }
                    tilt[i] += extra;
                }
                // H = θ + σ_f* D(log a)
                ws.sigma_f_transpose_apply(n, m, &dlog, &mut h);
                for (hv, th) in h.iter_mut().zip(&ws.theta) {
                    *hv += th;
                }
            }
        }
        if weighted {
            let mut h_dw = 0.0;
            let mut h_sq = 0.0;
            for col in 0..m {
                h_dw += h[col] * dwk[col];
                h_sq += h[col] * h[col];
            }
            // d(measure)/dP = exp(−∫H dWᴾ − ½∫|H|²); with the simulated
            // increments being measure-Brownian, dWᴾ = dW − H dt.
            log_weight += -h_dw + 0.5 * h_sq * dt;
        }

        let y_next = &mut tail[..n];
        for i in 0..n {
            let mut diff = 0.0;
            for col in 0..m {
                diff += ws.sigma_f[i * m + col] * dwk[col];
            }
            y_next[i] = head[k * n + i] + (ws.g[i] - tilt[i]) * dt + diff;
        }
    }

    Ok(PathData {
        dw: dw.to_vec(),
        factor,
        jumps: Vec::new(),
        wealth: None,
        log_weight,
        clamped_steps: clamps,
    })
}
