//! Small dense and banded solves used by the PDE stepper and the market
//! price of risk. Dimensions here are tiny (m, n ≤ 4 in practice), so plain
//! slices beat a matrix library in the per-step hot paths.

use crate::error::{Error, Result};

/// Solve `A x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `dim × dim` and is destroyed; `b` becomes the solution.
pub fn solve_dense_in_place(a: &mut [f64], b: &mut [f64], dim: usize) -> Result<()> {
    debug_assert_eq!(a.len(), dim * dim);
    debug_assert_eq!(b.len(), dim);
    let scale = a
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..dim {
        let mut pivot_row = col;
        let mut pivot_abs = a[col * dim + col].abs();
        for row in col + 1..dim {
            let v = a[row * dim + col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if pivot_abs < 1e-13 * scale {
            return Err(Error::SolverFailure(format!(
                "pivot {pivot_abs:.3e} below threshold in {dim}x{dim} solve"
            )));
        }
        if pivot_row != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot_row * dim + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * dim + col];
        for row in col + 1..dim {
            let factor = a[row * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] -= factor * a[col * dim + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..dim).rev() {
        let mut sum = b[col];
        for k in col + 1..dim {
            sum -= a[col * dim + k] * b[k];
        }
        b[col] = sum / a[col * dim + col];
    }
    Ok(())
}

/// Thomas algorithm for a tridiagonal system. `lower[0]` and
/// `upper[dim-1]` are ignored. Overwrites the scratch vectors.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    scratch: &mut Vec<f64>,
    x: &mut Vec<f64>,
) -> Result<()> {
    let dim = diag.len();
    scratch.clear();
    scratch.resize(dim, 0.0);
    x.clear();
    x.resize(dim, 0.0);
    let mut beta = diag[0];
    if beta.abs() < 1e-300 {
        return Err(Error::SolverFailure("zero pivot in tridiagonal solve".into()));
    }
    x[0] = rhs[0] / beta;
    for i in 1..dim {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        if beta.abs() < 1e-300 {
            return Err(Error::SolverFailure("zero pivot in tridiagonal solve".into()));
        }
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
    }
    for i in (0..dim - 1).rev() {
        let correction = scratch[i + 1] * x[i + 1];
        x[i] -= correction;
    }
    Ok(())
}

/// Matrix-free BiCGStab with Jacobi preconditioning, for the 2-D implicit
/// steps whose 9-point stencil is not tridiagonal. `apply` computes `A v`.
pub fn bicgstab<F>(
    apply: F,
    rhs: &[f64],
    x: &mut [f64],
    inv_diag: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = rhs.len();
    let norm_b = norm2(rhs);
    if norm_b == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let tol = rel_tol * norm_b;

    let mut r = vec![0.0; dim];
    apply(x, &mut r);
    for i in 0..dim {
        r[i] = rhs[i] - r[i];
    }
    let r0 = r.clone();
    let mut rho = 1.0_f64;
    let mut alpha = 1.0_f64;
    let mut omega = 1.0_f64;
    let mut v = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    let mut phat = vec![0.0; dim];
    let mut s = vec![0.0; dim];
    let mut shat = vec![0.0; dim];
    let mut t = vec![0.0; dim];

    for iter in 0..max_iter {
        let rho_next = dot(&r0, &r);
        if rho_next.abs() < 1e-300 {
            return Err(Error::SolverFailure("BiCGStab breakdown (rho ~ 0)".into()));
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..dim {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..dim {
            phat[i] = p[i] * inv_diag[i];
        }
        apply(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..dim {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= tol {
            for i in 0..dim {
                x[i] += alpha * phat[i];
            }
            return Ok(iter + 1);
        }
        for i in 0..dim {
            shat[i] = s[i] * inv_diag[i];
        }
        apply(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-300 {
            return Err(Error::SolverFailure("BiCGStab breakdown (t ~ 0)".into()));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..dim {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm2(&r) <= tol {
            return Ok(iter + 1);
        }
        if omega.abs() < 1e-300 {
            return Err(Error::SolverFailure("BiCGStab breakdown (omega ~ 0)".into()));
        }
    }
    Err(Error::SolverFailure(format!(
        "BiCGStab failed to converge in {max_iter} iterations"
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
