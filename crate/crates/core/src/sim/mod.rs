//! Path generation under the four measures, compound-Poisson claims,
//! wealth under a strategy, and exponential-martingale functionals.
//!
//! Determinism: each antithetic pair owns substreams derived from
//! `(seed, pair index)` alone, so identical configs give bit-identical
//! bundles regardless of chunking or thread count. Antithetic partners
//! reuse the pair's Brownian stream with every increment negated and share
//! the pair's jump stream.

mod claims;
mod factor;
mod martingale;
pub(crate) mod rng;
mod stats;
mod wealth;

pub use claims::{attach_claims, simulate_claims};
pub use factor::{simulate_factor, simulate_factor_range};
pub use martingale::{
    exponential_martingale, girsanov_log_weights, stats_of_exp, MartingaleEstimate,
};
pub use stats::{log_sum_exp, pairwise_stats, RunningStats};
pub use wealth::{simulate_wealth, wealth_paths};

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pde::{SurfaceTag, ValueSurface};

/// Fraction of steps allowed to clamp onto the surface grid before a
/// measure-changed simulation aborts.
pub const CLAMP_BUDGET: f64 = 0.01;

/// Paths per generation chunk when streaming estimators.
pub(crate) const CHUNK_PATHS: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub n_paths: usize,
    /// Euler step; must divide the horizon exactly (up to roundoff).
    pub dt: f64,
    pub seed: u64,
    pub antithetic: bool,
}

impl PathConfig {
    /// Defaults: `dt = horizon/500`, antithetic pairing on.
    pub fn new(n_paths: usize, horizon: f64, seed: u64) -> Self {
        PathConfig {
            n_paths,
            dt: horizon / 500.0,
            seed,
            antithetic: true,
        }
    }

    pub fn steps(&self, horizon: f64) -> Result<usize> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Euler step must be positive, got {}",
                self.dt
            )));
        }
        let steps = (horizon / self.dt).round();
        if steps < 1.0 {
            return Err(Error::InvalidParameter(
                "Euler step larger than the horizon".into(),
            ));
        }
        if (steps * self.dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} does not divide the horizon {horizon}",
                self.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn validate(&self, horizon: f64) -> Result<usize> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("need at least one path".into()));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidParameter(
                "antithetic pairing needs an even path count".into(),
            ));
        }
        self.steps(horizon)
    }

    /// Number of pair units (antithetic pairs or single paths).
    pub(crate) fn n_pairs(&self) -> u64 {
        if self.antithetic {
            (self.n_paths / 2) as u64
        } else {
            self.n_paths as u64
        }
    }
}

/// Measure a bundle is simulated under. `P_bar` carries the `a` surface
/// its drift reads; `P_hat_N` carries it for the jump tilt of its density
/// (its factor drift needs no surface).
#[derive(Debug, Clone)]
pub enum MeasureTag {
    P,
    PHat,
    PBar(Arc<ValueSurface>),
    PHatN(Arc<ValueSurface>),
}

impl MeasureTag {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureTag::P => "P",
            MeasureTag::PHat => "P_hat",
            MeasureTag::PBar(_) => "P_bar",
            MeasureTag::PHatN(_) => "P_hat_N",
        }
    }

    pub(crate) fn surface(&self) -> Option<&ValueSurface> {
        match self {
            MeasureTag::PBar(s) | MeasureTag::PHatN(s) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn check_surface(&self) -> Result<()> {
        if let Some(s) = self.surface() {
            if s.tag() != SurfaceTag::A {
                return Err(Error::InvalidParameter(format!(
                    "measure {} needs an `a` surface, got `{}`",
                    self.name(),
                    s.tag().as_str()
                )));
            }
        }
        Ok(())
    }
}

/// One claim arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    /// Absolute time (same clock as the lattice).
    pub time: f64,
    pub size: f64,
}

/// One trajectory: driving Brownian increments, the factor path, claim
/// arrivals, optional wealth, and the log-likelihood of the simulation
/// measure relative to P along this path (Brownian part; zero under P).
#[derive(Debug, Clone)]
pub struct PathData {
    /// steps × m, row per step.
    pub dw: Vec<f64>,
    /// (steps+1) × n, row per lattice node.
    pub factor: Vec<f64>,
    pub jumps: Vec<Jump>,
    pub wealth: Option<Vec<f64>>,
    pub log_weight: f64,
}

impl PathData {
    pub fn factor_at(&self, k: usize, factor_dim: usize) -> &[f64] {
        &self.factor[k * factor_dim..(k + 1) * factor_dim]
    }

    pub fn dw_at(&self, k: usize, asset_dim: usize) -> &[f64] {
        &self.dw[k * asset_dim..(k + 1) * asset_dim]
    }

    /// Sum of jump sizes in the step interval `(t_k, t_{k+1}]`.
    pub fn jump_sum_in_step(&self, t_k: f64, t_next: f64) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.time > t_k && j.time <= t_next)
            .map(|j| j.size)
            .sum()
    }
}

/// A batch of simulated trajectories under one tagged measure.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub measure: MeasureTag,
    pub t0: f64,
    pub horizon: f64,
    /// Effective Euler step (`horizon / steps` exactly).
    pub dt: f64,
    pub steps: usize,
    pub factor_dim: usize,
    pub asset_dim: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// First pair index in this bundle (non-zero for streamed chunks).
    pub pair_offset: u64,
    pub clamped_steps: u64,
    pub paths: Vec<PathData>,
}

impl PathBundle {
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn mean_jump_count(&self) -> f64 {
        if self.paths.is_empty() {
            return 0.0;
        }
        self.paths.iter().map(|p| p.jumps.len() as f64).sum::<f64>() / self.paths.len() as f64
    }

    /// CSV export, one row per (path, step). `jump` aggregates the claim
    /// sizes landing in the step ending at `t`; `wealth` is blank when the
    /// bundle carries none.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "path,step,t")?;
        for i in 0..self.factor_dim {
            write!(w, ",y{}", i + 1)?;
        }
        for i in 0..self.asset_dim {
            write!(w, ",dw{}", i + 1)?;
        }
        writeln!(w, ",jump,wealth")?;
        for (p, path) in self.paths.iter().enumerate() {
            for k in 0..=self.steps {
                write!(w, "{p},{k},{:.16e}", self.time(k))?;
                for v in path.factor_at(k, self.factor_dim) {
                    write!(w, ",{v:.16e}")?;
                }
                if k < self.steps {
                    for v in path.dw_at(k, self.asset_dim) {
                        write!(w, ",{v:.16e}")?;
                    }
                } else {
                    for _ in 0..self.asset_dim {
                        write!(w, ",")?;
                    }
                }
                let jump = if k == 0 {
                    0.0
                } else {
                    path.jump_sum_in_step(self.time(k - 1), self.time(k))
                };
                write!(w, ",{jump:.16e}")?;
                match &path.wealth {
                    Some(x) => writeln!(w, ",{:.16e}", x[k])?,
                    None => writeln!(w, ",")?,
                }
            }
        }
        Ok(())
    }

    /// Compact little-endian dump: magic `ICPB1`; u32 header
    /// `n_paths, steps, factor_dim, asset_dim, flags` (bit 0: wealth,
    /// bit 1: antithetic); u64 seed; f64 `t0, dt`; then per path the factor
    /// lattice, the Brownian increments, wealth when present, `u32` jump
    /// count followed by (time, size) f64 pairs, and the log-weight.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"ICPB1")?;
        let has_wealth = self.paths.iter().all(|p| p.wealth.is_some());
        let flags = (has_wealth as u32) | ((self.antithetic as u32) << 1);
        for v in [
            self.paths.len() as u32,
            self.steps as u32,
            self.factor_dim as u32,
            self.asset_dim as u32,
            flags,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.t0.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        for path in &self.paths {
            for v in &path.factor {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in &path.dw {
                w.write_all(&v.to_le_bytes())?;
            }
            if has_wealth {
                for v in path.wealth.as_ref().expect("wealth checked") {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            w.write_all(&(path.jumps.len() as u32).to_le_bytes())?;
            for j in &path.jumps {
                w.write_all(&j.time.to_le_bytes())?;
                w.write_all(&j.size.to_le_bytes())?;
            }
            w.write_all(&path.log_weight.to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`write_binary`]; the measure tag is not serialized, so
    /// re-read bundles are tagged `P`.
    ///
    /// [`write_binary`]: PathBundle::write_binary
    pub fn read_binary<R: Read>(r: &mut R) -> Result<PathBundle> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != b"ICPB1" {
            return Err(Error::InvalidParameter(
                "bad magic in path bundle dump".into(),
            ));
        }
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut u32buf)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let n_paths = read_u32(r)? as usize;
        let steps = read_u32(r)? as usize;
        let factor_dim = read_u32(r)? as usize;
        let asset_dim = read_u32(r)? as usize;
        let flags = read_u32(r)?;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let seed = u64::from_le_bytes(u64buf);
        let mut f64buf = [0u8; 8];
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut f64buf)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let t0 = read_f64(r)?;
        let dt = read_f64(r)?;
        let has_wealth = flags & 1 != 0;
        let mut paths = Vec::with_capacity(n_paths);
        for _ in 0..n_paths {
            let mut factor = vec![0.0; (steps + 1) * factor_dim];
            for v in &mut factor {
                *v = read_f64(r)?;
            }
            let mut dw = vec![0.0; steps * asset_dim];
            for v in &mut dw {
                *v = read_f64(r)?;
            }
            let wealth = if has_wealth {
                let mut x = vec![0.0; steps + 1];
                for v in &mut x {
                    *v = read_f64(r)?;
                }
                Some(x)
            } else {
                None
            };
            let mut jc = [0u8; 4];
            r.read_exact(&mut jc)?;
            let jump_count = u32::from_le_bytes(jc) as usize;
            let mut jumps = Vec::with_capacity(jump_count);
            for _ in 0..jump_count {
                let time = read_f64(r)?;
                let size = read_f64(r)?;
                jumps.push(Jump { time, size });
            }
            let log_weight = read_f64(r)?;
            paths.push(PathData {
                dw,
                factor,
                jumps,
                wealth,
                log_weight,
            });
        }
        Ok(PathBundle {
            measure: MeasureTag::P,
            t0,
            horizon: dt * steps as f64,
            dt,
            steps,
            factor_dim,
            asset_dim,
            seed,
            antithetic: flags & 2 != 0,
            pair_offset: 0,
            clamped_steps: 0,
            paths,
        })
    }
}

/// A deterministic feedback allocation map `(t, x, y) → π ∈ ℝᵐ`.
pub trait StrategyMap: Sync {
    fn allocation(&self, t: f64, x: f64, y: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Run one closure per pair unit, in parallel when the `parallel` feature
/// is on, and splice results back in pair order.
pub(crate) fn collect_pairs<T: Send>(
    pair_lo: u64,
    pair_hi: u64,
    f: impl Fn(u64) -> Result<Vec<T>> + Sync,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let nested: Result<Vec<Vec<T>>> = (pair_lo..pair_hi).into_par_iter().map(f).collect();
        Ok(nested?.into_iter().flatten().collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut out = Vec::new();
        for pair in pair_lo..pair_hi {
            out.extend(f(pair)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
