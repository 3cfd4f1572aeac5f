//! Sampled scalar functions of `(t, y)` with interpolation, central
//! difference gradients, and CSV export.

use std::io::Write;

use crate::error::{Error, Result};
use crate::pde::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceTag {
    AHat,
    A,
    B,
    Eta,
    Phi,
}

impl SurfaceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SurfaceTag::AHat => "a_hat",
            SurfaceTag::A => "a",
            SurfaceTag::B => "b",
            SurfaceTag::Eta => "eta",
            SurfaceTag::Phi => "phi",
        }
    }
}

/// Values sampled on the space-time grid, time-major
/// (`values[k * n_nodes + node]`). Immutable once built.
#[derive(Debug, Clone)]
pub struct ValueSurface {
    grid: GridSpec,
    tag: SurfaceTag,
    values: Vec<f64>,
}

impl ValueSurface {
    pub fn new(grid: GridSpec, tag: SurfaceTag, values: Vec<f64>) -> Result<Self> {
        let expected = (grid.time_steps + 1) * grid.n_nodes();
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "surface `{}` has {} values, expected {expected}",
                tag.as_str(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::SolverFailure(format!(
                "surface `{}` contains a non-finite value at flat index {bad}",
                tag.as_str()
            )));
        }
        Ok(ValueSurface { grid, tag, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn tag(&self) -> SurfaceTag {
        self.tag
    }

    pub fn node_value(&self, k: usize, node: usize) -> f64 {
        self.values[k * self.grid.n_nodes() + node]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise transform into a new surface (used for `a = 1/â` and
    /// `η = α − 1/η̃`).
    pub fn map(&self, tag: SurfaceTag, f: impl Fn(f64) -> f64) -> Result<ValueSurface> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        ValueSurface::new(self.grid.clone(), tag, values)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), &v| (lo.min(v), hi.max(v)),
        )
    }

    /// Central-difference gradient component at a node; one-sided at the
    /// two boundary nodes of the axis.
    pub fn node_gradient(&self, k: usize, node: usize, axis: usize) -> f64 {
        node_slope(&self.grid, axis, |n| self.node_value(k, n), node)
    }

    fn locate(&self, t: f64, y: &[f64]) -> Result<(usize, f64, Vec<(usize, f64)>)> {
        let grid = &self.grid;
        if y.len() != grid.dim() || !grid.contains(y) || t < -1e-9 * grid.horizon.max(1.0) {
            return Err(Error::OutOfDomain { t, y: y.to_vec() });
        }
        if t > grid.horizon * (1.0 + 1e-9) {
            return Err(Error::OutOfDomain { t, y: y.to_vec() });
        }
        let steps = grid.time_steps;
        let tau = (t / grid.dt()).clamp(0.0, steps as f64);
        let k = (tau.floor() as usize).min(steps - 1);
        let wt = tau - k as f64;
        let mut cells = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let h = grid.spacing(axis);
            let rel = ((y[axis] - grid.bounds[axis].0) / h)
                .clamp(0.0, (grid.points_per_axis - 1) as f64);
            let i = (rel.floor() as usize).min(grid.points_per_axis - 2);
            cells.push((i, rel - i as f64));
        }
        Ok((k, wt, cells))
    }

    /// Multilinear interpolation of an arbitrary node field at `(t, y)`.
    fn interpolate_field(
        &self,
        t: f64,
        y: &[f64],
        field: impl Fn(usize, usize) -> f64,
    ) -> Result<f64> {
        let (k, wt, cells) = self.locate(t, y)?;
        let corners: usize = 1 << self.grid.dim();
        let mut out = 0.0;
        for time_side in 0..2 {
            let tw = if time_side == 0 { 1.0 - wt } else { wt };
            if tw == 0.0 {
                continue;
            }
            let kk = k + time_side;
            let mut slice_val = 0.0;
            for corner in 0..corners {
                let mut w = 1.0;
                let mut idx = [0usize; 2];
                for (axis, (i, frac)) in cells.iter().enumerate() {
                    let hi = (corner >> axis) & 1 == 1;
                    w *= if hi { *frac } else { 1.0 - frac };
                    idx[axis] = i + if hi { 1 } else { 0 };
                }
                if w != 0.0 {
                    slice_val += w * field(kk, self.grid.node_from_indices(idx));
                }
            }
            out += tw * slice_val;
        }
        Ok(out)
    }

    /// Surface value at `(t, y)`; errors outside the domain.
    pub fn value_at(&self, t: f64, y: &[f64]) -> Result<f64> {
        self.interpolate_field(t, y, |k, node| self.node_value(k, node))
    }

    /// Interpolated central-difference gradient at `(t, y)`.
    pub fn gradient_at(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        for axis in 0..self.grid.dim() {
            out[axis] = self.interpolate_field(t, y, |k, node| self.node_gradient(k, node, axis))?;
        }
        Ok(())
    }

    /// Interpolated gradient of `log(values)`; the drift form `Da/a` used
    /// by the measure-changed dynamics. Values must be positive.
    pub fn log_gradient_at(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        for axis in 0..self.grid.dim() {
            out[axis] = self.interpolate_field(t, y, |k, node| {
                node_slope(&self.grid, axis, |n| self.node_value(k, n).ln(), node)
            })?;
        }
        Ok(())
    }

    /// CSV export: header `t,y1[,y2],value`, row-major by time step,
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.grid.dim() == 1 {
            writeln!(w, "t,y1,value")?;
        } else {
            writeln!(w, "t,y1,y2,value")?;
        }
        let mut y = vec![0.0; self.grid.dim()];
        for k in 0..=self.grid.time_steps {
            let t = self.grid.time(k);
            for node in 0..self.grid.n_nodes() {
                self.grid.fill_node_coords(node, &mut y);
                if self.grid.dim() == 1 {
                    writeln!(w, "{:.16e},{:.16e},{:.16e}", t, y[0], self.node_value(k, node))?;
                } else {
                    writeln!(
                        w,
                        "{:.16e},{:.16e},{:.16e},{:.16e}",
                        t,
                        y[0],
                        y[1],
                        self.node_value(k, node)
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Slope of a node field along `axis`: central in the interior, one-sided
/// at the two boundary nodes.
pub(crate) fn node_slope(
    grid: &GridSpec,
    axis: usize,
    value: impl Fn(usize) -> f64,
    node: usize,
) -> f64 {
    let h = grid.spacing(axis);
    let idx = grid.node_indices(node);
    let i = idx[axis];
    let last = grid.points_per_axis - 1;
    let at = |j: usize| {
        let mut shifted = idx;
        shifted[axis] = j;
        value(grid.node_from_indices(shifted))
    };
    if i == 0 {
        (at(1) - at(0)) / h
    } else if i == last {
        (at(last) - at(last - 1)) / h
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * h)
    }
}
