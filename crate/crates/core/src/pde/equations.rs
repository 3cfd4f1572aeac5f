//! The four backward solves.
//!
//! `a` and `η` satisfy semilinear equations, but both linearize exactly:
//! `â = 1/a` and `η̃ = 1/(α − η)` solve the same *linear* equation
//!
//! ```text
//! u_t + ½ tr(σ_f σ_f* D²u) + (g − σ_f θ)·Du − r u = 0,   u(T) = 1/α,
//! ```
//!
//! so each route solves its linear problem and inverts. The two routes are
//! assembled independently here; by construction they agree on `a = α − η`,
//! which is exactly the content of the solution identity — the identity
//! checks with real teeth are the `φ` vs `log(a/α) − b` pair and the
//! strategy formulas, whose sources and gradients differ.
//!
//! `b` and `φ` are genuinely linear with drift
//! `g − σ_f θ − σ_f σ_f* D(log a)` and sources
//!
//! ```text
//! b: ½|θ + σ_f* D(log a)|² + c a − ψ(a)
//! φ: −D(log a)·σ_f θ − ½|θ|² + r − c a + ψ(a)          (a ≡ α − η)
//! ```
//!
//! `D(log a)` is used instead of `Da/a` on both routes for numerical
//! symmetry.

use crate::error::{Error, Result};
use crate::model::{ClaimModel, ModelSpec, UtilitySpec};
use crate::pde::grid::GridSpec;
use crate::pde::solver::{solve_backward, LinearPde, SolverOptions};
use crate::pde::surface::{node_slope, SurfaceTag, ValueSurface};

/// Time-independent coefficient tables on the grid nodes.
pub(crate) struct NodeTables {
    pub dim: usize,
    pub asset_dim: usize,
    /// nodes × n²: `σ_f σ_f*`.
    pub diffusion: Vec<f64>,
    /// nodes × n: `g − σ_f θ`.
    pub drift_hat: Vec<f64>,
    /// nodes: `r(y)`.
    pub rate: Vec<f64>,
    /// nodes × m: `θ(y)`.
    pub theta: Vec<f64>,
    /// nodes: `|θ(y)|²`.
    pub theta_sq: Vec<f64>,
    /// nodes × n·m: `σ_f(y)`.
    pub sigma_f: Vec<f64>,
    /// nodes × n: `σ_f θ`.
    pub sigma_f_theta: Vec<f64>,
}

pub(crate) fn node_tables(model: &ModelSpec, grid: &GridSpec) -> Result<NodeTables> {
    let n = model.factor_dim;
    let m = model.asset_dim;
    if grid.dim() != n {
        return Err(Error::Dimension(format!(
            "grid has {} axes but the model factor dimension is {n}",
            grid.dim()
        )));
    }
    let nodes = grid.n_nodes();
    let mut tables = NodeTables {
        dim: n,
        asset_dim: m,
        diffusion: vec![0.0; nodes * n * n],
        drift_hat: vec![0.0; nodes * n],
        rate: vec![0.0; nodes],
        theta: vec![0.0; nodes * m],
        theta_sq: vec![0.0; nodes],
        sigma_f: vec![0.0; nodes * n * m],
        sigma_f_theta: vec![0.0; nodes * n],
    };
    let mut ws = model.workspace();
    let mut y = vec![0.0; n];
    for node in 0..nodes {
        grid.fill_node_coords(node, &mut y);
        model.eval_into(&y, &mut ws)?;
        tables.rate[node] = ws.r;
        tables.theta[node * m..(node + 1) * m].copy_from_slice(&ws.theta);
        tables.theta_sq[node] = ws.theta.iter().map(|t| t * t).sum();
        tables.sigma_f[node * n * m..(node + 1) * n * m].copy_from_slice(&ws.sigma_f);
        ws.factor_gram_into(n, m, &mut tables.diffusion[node * n * n..(node + 1) * n * n]);
        let sft = &mut tables.sigma_f_theta[node * n..(node + 1) * n];
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..m {
                s += ws.sigma_f[i * m + k] * ws.theta[k];
            }
            sft[i] = s;
        }
        for i in 0..n {
            tables.drift_hat[node * n + i] = ws.g[i] - sft[i];
        }
    }
    Ok(tables)
}

/// Solve the linear discount equation for `â = 1/a`, terminal `1/α`.
/// The interior stays above `e^{−r̄T}/α` up to discretization error.
pub fn solve_a_hat(
    model: &ModelSpec,
    utility: &UtilitySpec,
    grid: &GridSpec,
    opts: &SolverOptions,
) -> Result<ValueSurface> {
    let tables = node_tables(model, grid)?;
    let n = tables.dim;
    let inv_alpha = 1.0 / utility.risk_aversion;
    let pde = LinearPde {
        diffusion: Box::new(|node, out| {
            out.copy_from_slice(&tables.diffusion[node * n * n..(node + 1) * n * n])
        }),
        drift: Box::new(|_k, node, out| {
            out.copy_from_slice(&tables.drift_hat[node * n..(node + 1) * n])
        }),
        reaction: Box::new(|_k, node| tables.rate[node]),
        source: Box::new(|_k, _node| Ok(0.0)),
        terminal: Box::new(move |_node| inv_alpha),
    };
    let surface = solve_backward(grid, SurfaceTag::AHat, &pde, opts)?;
    if surface.min_max().0 <= 0.0 {
        return Err(Error::Positivity {
            surface: "a_hat",
            step: 0,
        });
    }
    Ok(surface)
}

/// Pointwise reciprocal `a = 1/â`, with the terminal slice pinned to `α`
/// exactly.
pub fn a_from_a_hat(a_hat: &ValueSurface, alpha: f64) -> Result<ValueSurface> {
    if a_hat.tag() != SurfaceTag::AHat {
        return Err(Error::InvalidParameter(format!(
            "expected an a_hat surface, got `{}`",
            a_hat.tag().as_str()
        )));
    }
    if a_hat.min_max().0 <= 0.0 {
        return Err(Error::Positivity {
            surface: "a_hat",
            step: 0,
        });
    }
    let grid = a_hat.grid().clone();
    let nodes = grid.n_nodes();
    let steps = grid.time_steps;
    let mut values: Vec<f64> = a_hat.values().iter().map(|v| 1.0 / v).collect();
    for node in 0..nodes {
        values[steps * nodes + node] = alpha;
    }
    ValueSurface::new(grid, SurfaceTag::A, values)
}

/// Solve the `b` equation on the grid of the supplied `a` surface.
pub fn solve_b(
    model: &ModelSpec,
    claims: &ClaimModel,
    utility: &UtilitySpec,
    a: &ValueSurface,
    opts: &SolverOptions,
) -> Result<ValueSurface> {
    if a.tag() != SurfaceTag::A {
        return Err(Error::InvalidParameter(format!(
            "expected an `a` surface, got `{}`",
            a.tag().as_str()
        )));
    }
    let grid = a.grid().clone();
    let tables = node_tables(model, &grid)?;
    let n = tables.dim;
    let m = tables.asset_dim;
    let premium = utility.premium_rate;
    let log_slope =
        |k: usize, node: usize, axis: usize| node_slope(&grid, axis, |j| a.node_value(k, j).ln(), node);
    let pde = LinearPde {
        diffusion: Box::new(|node, out| {
            out.copy_from_slice(&tables.diffusion[node * n * n..(node + 1) * n * n])
        }),
        drift: Box::new(|k, node, out| {
            let s = &tables.diffusion[node * n * n..(node + 1) * n * n];
            for i in 0..n {
                let mut tilt = 0.0;
                for j in 0..n {
                    tilt += s[i * n + j] * log_slope(k, node, j);
                }
                out[i] = tables.drift_hat[node * n + i] - tilt;
            }
        }),
        reaction: Box::new(|_k, _node| 0.0),
        source: Box::new(|k, node| {
            let a_val = a.node_value(k, node);
            let psi = claims.psi(a_val)?;
            let sf = &tables.sigma_f[node * n * m..(node + 1) * n * m];
            let theta = &tables.theta[node * m..(node + 1) * m];
            let mut sq = 0.0;
            for col in 0..m {
                let mut w = theta[col];
                for i in 0..n {
                    w += sf[i * m + col] * log_slope(k, node, i);
                }
                sq += w * w;
            }
            Ok(0.5 * sq + premium * a_val - psi)
        }),
        terminal: Box::new(|_node| 0.0),
    };
    solve_backward(&grid, SurfaceTag::B, &pde, opts)
}

/// Solve the `η` equation through its own linearization `η̃ = 1/(α − η)`,
/// assembled independently of the `â` route, then invert. The terminal
/// slice is pinned to zero exactly.
pub fn solve_eta(
    model: &ModelSpec,
    utility: &UtilitySpec,
    grid: &GridSpec,
    opts: &SolverOptions,
) -> Result<ValueSurface> {
    let tables = node_tables(model, grid)?;
    let n = tables.dim;
    let alpha = utility.risk_aversion;
    let terminal = 1.0 / alpha;
    let pde = LinearPde {
        diffusion: Box::new(|node, out| {
            out.copy_from_slice(&tables.diffusion[node * n * n..(node + 1) * n * n])
        }),
        drift: Box::new(|_k, node, out| {
            out.copy_from_slice(&tables.drift_hat[node * n..(node + 1) * n])
        }),
        reaction: Box::new(|_k, node| tables.rate[node]),
        source: Box::new(|_k, _node| Ok(0.0)),
        terminal: Box::new(move |_node| terminal),
    };
    let eta_tilde = solve_backward(grid, SurfaceTag::AHat, &pde, opts)?;
    if eta_tilde.min_max().0 <= 0.0 {
        return Err(Error::Positivity {
            surface: "eta_tilde",
            step: 0,
        });
    }
    let nodes = grid.n_nodes();
    let steps = grid.time_steps;
    let mut values: Vec<f64> = eta_tilde.values().iter().map(|v| alpha - 1.0 / v).collect();
    for node in 0..nodes {
        values[steps * nodes + node] = 0.0;
    }
    ValueSurface::new(grid.clone(), SurfaceTag::Eta, values)
}

/// Solve the `φ` equation on the grid of the supplied `η` surface.
pub fn solve_phi(
    model: &ModelSpec,
    claims: &ClaimModel,
    utility: &UtilitySpec,
    eta: &ValueSurface,
    opts: &SolverOptions,
) -> Result<ValueSurface> {
    if eta.tag() != SurfaceTag::Eta {
        return Err(Error::InvalidParameter(format!(
            "expected an `eta` surface, got `{}`",
            eta.tag().as_str()
        )));
    }
    let grid = eta.grid().clone();
    let tables = node_tables(model, &grid)?;
    let n = tables.dim;
    let alpha = utility.risk_aversion;
    let premium = utility.premium_rate;
    // Dη/(α−η) = −D log(α−η); the drift tilt and source both read it.
    let log_slope = |k: usize, node: usize, axis: usize| {
        node_slope(&grid, axis, |j| (alpha - eta.node_value(k, j)).ln(), node)
    };
    let pde = LinearPde {
        diffusion: Box::new(|node, out| {
            out.copy_from_slice(&tables.diffusion[node * n * n..(node + 1) * n * n])
        }),
        drift: Box::new(|k, node, out| {
            let s = &tables.diffusion[node * n * n..(node + 1) * n * n];
            for i in 0..n {
                let mut tilt = 0.0;
                for j in 0..n {
                    tilt += s[i * n + j] * log_slope(k, node, j);
                }
                out[i] = tables.drift_hat[node * n + i] - tilt;
            }
        }),
        reaction: Box::new(|_k, _node| 0.0),
        source: Box::new(|k, node| {
            let a_val = alpha - eta.node_value(k, node);
            let psi = claims.psi(a_val)?;
            let sft = &tables.sigma_f_theta[node * n..(node + 1) * n];
            let mut cross = 0.0;
            for i in 0..n {
                cross += log_slope(k, node, i) * sft[i];
            }
            Ok(-cross - 0.5 * tables.theta_sq[node] + tables.rate[node] - premium * a_val + psi)
        }),
        terminal: Box::new(|_node| 0.0),
    };
    solve_backward(&grid, SurfaceTag::Phi, &pde, opts)
}

/// Central-difference gradient of a surface at `(t, y)`. Errors outside
/// the solved domain.
pub fn gradient(surface: &ValueSurface, t: f64, y: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; surface.grid().dim()];
    surface.gradient_at(t, y, &mut out)?;
    Ok(out)
}

/// A-posteriori residual of the semilinear `a` equation
/// `a_t + ½tr(S D²a) + (g − σθ)·Da − (Da·S·Da)/a + r a` over interior
/// nodes and interior time levels. Returns `(max_abs, rms)`.
pub fn semilinear_residual_a(model: &ModelSpec, a: &ValueSurface) -> Result<(f64, f64)> {
    if a.tag() != SurfaceTag::A {
        return Err(Error::InvalidParameter("expected an `a` surface".into()));
    }
    let grid = a.grid();
    let tables = node_tables(model, grid)?;
    let n = grid.dim();
    let dt = grid.dt();
    let last = grid.points_per_axis - 1;
    let mut max_abs = 0.0_f64;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    let mut da = vec![0.0; n];
    for k in 1..grid.time_steps {
        for node in 0..grid.n_nodes() {
            let idx = grid.node_indices(node);
            if (0..n).any(|ax| idx[ax] == 0 || idx[ax] == last) {
                continue;
            }
            let v = a.node_value(k, node);
            let ddt = (a.node_value(k + 1, node) - a.node_value(k - 1, node)) / (2.0 * dt);
            for axis in 0..n {
                da[axis] = a.node_gradient(k, node, axis);
            }
            let s = &tables.diffusion[node * n * n..(node + 1) * n * n];
            let mut tr = 0.0;
            for axis in 0..n {
                let h = grid.spacing(axis);
                let mut up = idx;
                up[axis] += 1;
                let mut dn = idx;
                dn[axis] -= 1;
                let second = (a.node_value(k, grid.node_from_indices(up)) - 2.0 * v
                    + a.node_value(k, grid.node_from_indices(dn)))
                    / (h * h);
                tr += s[axis * n + axis] * second;
            }
            if n == 2 {
                let h0 = grid.spacing(0);
                let h1 = grid.spacing(1);
                let at = |i0: usize, i1: usize| a.node_value(k, i1 * grid.points_per_axis + i0);
                let mixed = (at(idx[0] + 1, idx[1] + 1) - at(idx[0] + 1, idx[1] - 1)
                    - at(idx[0] - 1, idx[1] + 1)
                    + at(idx[0] - 1, idx[1] - 1))
                    / (4.0 * h0 * h1);
                tr += 2.0 * s[1] * mixed;
            }
            let drift: f64 = (0..n)
                .map(|i| tables.drift_hat[node * n + i] * da[i])
                .sum();
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += da[i] * s[i * n + j] * da[j];
                }
            }
            let res = ddt + 0.5 * tr + drift - quad / v + tables.rate[node] * v;
            max_abs = max_abs.max(res.abs());
            sum_sq += res * res;
            count += 1;
        }
    }
    Ok((max_abs, (sum_sq / count.max(1) as f64).sqrt()))
}

/// Max over interior nodes (all time levels) of a per-node functional.
/// Used by the identity and bound checks.
pub fn interior_max(grid: &GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let last = grid.points_per_axis - 1;
    let mut out = f64::NEG_INFINITY;
    for k in 0..=grid.time_steps {
        for node in 0..grid.n_nodes() {
            let idx = grid.node_indices(node);
            if (0..grid.dim()).any(|ax| idx[ax] == 0 || idx[ax] == last) {
                continue;
            }
            out = out.max(f(k, node));
        }
    }
    out
}

/// Largest one-step *increase* of the surface in forward time; a
/// non-increasing-in-t surface reports ≤ 0 up to roundoff.
pub fn max_time_increase(surface: &ValueSurface) -> f64 {
    let grid = surface.grid();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..grid.time_steps {
        for node in 0..grid.n_nodes() {
            worst = worst.max(surface.node_value(k + 1, node) - surface.node_value(k, node));
        }
    }
    worst
}

/// Empirical constant of the gradient-growth bound `|Da|/a ≤ C(1 + |y|)`,
/// scanned over interior nodes.
pub fn gradient_growth_constant(a: &ValueSurface) -> f64 {
    let grid = a.grid().clone();
    let n = grid.dim();
    let mut y = vec![0.0; n];
    interior_max(&grid, |k, node| {
        grid.fill_node_coords(node, &mut y);
        let norm_y = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut grad_sq = 0.0;
        for axis in 0..n {
            let g = a.node_gradient(k, node, axis);
            grad_sq += g * g;
        }
        grad_sq.sqrt() / a.node_value(k, node) / (1.0 + norm_y)
    })
}
