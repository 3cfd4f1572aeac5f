//! Space-time grid for the backward solves. Finite differences are
//! restricted to factor dimension n ≤ 2; higher dimensions are served by
//! the Monte Carlo route only.

use crate::error::{Error, Result};
use crate::model::{envelope_bounds, ModelSpec, UtilitySpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Per-axis bounds `[y_min, y_max]`.
    pub bounds: Vec<(f64, f64)>,
    /// Points per axis; odd and ≥ 3 so the centre sits on a node.
    pub points_per_axis: usize,
    /// Number of backward time steps.
    pub time_steps: usize,
    /// Terminal time `T`; the grid spans `t ∈ [0, T]`.
    pub horizon: f64,
}

impl GridSpec {
    pub fn new(
        bounds: Vec<(f64, f64)>,
        points_per_axis: usize,
        time_steps: usize,
        horizon: f64,
    ) -> Result<Self> {
        let grid = GridSpec {
            bounds,
            points_per_axis,
            time_steps,
            horizon,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Default domain `y0 ± 5·‖σ_f(y0)‖·√T`, 201 points per axis, 200 steps.
    pub fn defaults_for(model: &ModelSpec, utility: &UtilitySpec) -> Result<Self> {
        GridSpec::new(
            envelope_bounds(model, utility, 5.0),
            201,
            200,
            utility.horizon,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.bounds.len();
        if n == 0 || n > 2 {
            return Err(Error::Grid(format!(
                "finite differences support 1 or 2 factor dimensions, got {n}"
            )));
        }
        if self.points_per_axis < 3 || self.points_per_axis % 2 == 0 {
            return Err(Error::Grid(format!(
                "points per axis must be odd and at least 3, got {}",
                self.points_per_axis
            )));
        }
        if self.time_steps < 1 {
            return Err(Error::Grid("need at least one time step".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Grid(format!("horizon must be positive, got {}", self.horizon)));
        }
        for (lo, hi) in &self.bounds {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(Error::Grid(format!("invalid axis bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.time_steps as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / (self.points_per_axis - 1) as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.points_per_axis.pow(self.dim() as u32)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.time_steps as f64
    }

    /// Decompose a flat node index into per-axis indices (axis 0 fastest).
    pub fn node_indices(&self, node: usize) -> [usize; 2] {
        match self.dim() {
            1 => [node, 0],
            _ => [node % self.points_per_axis, node / self.points_per_axis],
        }
    }

    pub fn node_from_indices(&self, idx: [usize; 2]) -> usize {
        match self.dim() {
            1 => idx[0],
            _ => idx[1] * self.points_per_axis + idx[0],
        }
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.bounds[axis].0 + self.spacing(axis) * i as f64
    }

    pub fn fill_node_coords(&self, node: usize, out: &mut [f64]) {
        let idx = self.node_indices(node);
        for axis in 0..self.dim() {
            out[axis] = self.axis_coord(axis, idx[axis]);
        }
    }

    /// True when `y` lies inside the bounds (with a tiny roundoff slack).
    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter().zip(&self.bounds).all(|(v, (lo, hi))| {
            let slack = 1e-9 * (hi - lo);
            *v >= lo - slack && *v <= hi + slack
        })
    }

    /// Clamp `y` into the bounds componentwise; returns true if anything
    /// moved. Used by the measure-changed simulations that read surface
    /// gradients along paths.
    pub fn clamp(&self, y: &mut [f64]) -> bool {
        let mut clamped = false;
        for (v, (lo, hi)) in y.iter_mut().zip(&self.bounds) {
            if *v < *lo {
                *v = *lo;
                clamped = true;
            } else if *v > *hi {
                *v = *hi;
                clamped = true;
            }
        }
        clamped
    }
}
