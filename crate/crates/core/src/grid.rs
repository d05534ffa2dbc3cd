//! Tensor-product grids on axis-aligned rectangles, nodal fields, and the
//! uniform time grids used by the fractional time steppers.
//!
//! Conventions shared by the whole crate:
//!
//! * Spatial nodes are vertex-centred: `x_i = x_min + i * hx` for
//!   `i = 0..nx-1`, likewise in `y`.  Nodal values are stored row-major by
//!   `y` then `x`, i.e. the flat index of node `(i, j)` is `j * nx + i`.
//! * All discrete L2 inner products and norms use the tensor-product
//!   trapezoid rule: weight 1 at interior nodes, 1/2 on edges, 1/4 at
//!   corners, times the cell area `hx * hy`.
//! * Time grids are uniform with `nt` steps on `[0, T]`; fields in time
//!   carry `nt + 1` snapshots, with snapshot 0 at `t = 0`.

use crate::error::{Error, Result};

/// Uniform tensor-product grid on the rectangle
/// `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Number of nodes along `x` (including both boundary nodes).
    pub nx: usize,
    /// Number of nodes along `y` (including both boundary nodes).
    pub ny: usize,
}

impl Grid2D {
    /// Builds a grid, validating extents and a minimum of 3 nodes per
    /// direction (one interior node).
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::domain("grid extents must be finite"));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::domain("grid extents must satisfy x_min < x_max and y_min < y_max"));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::domain("grids need at least 3 nodes per direction"));
        }
        Ok(Grid2D { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Unit square helper used by most experiments.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        Grid2D::new(0.0, 1.0, 0.0, 1.0, nx, ny)
    }

    /// Mesh width along `x`.
    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    /// Mesh width along `y`.
    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    /// Total number of nodes.
    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of node `(i, j)` (row-major by `y` then `x`).
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// `x` coordinate of column `i`.
    #[inline]
    pub fn node_x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.hx()
    }

    /// `y` coordinate of row `j`.
    #[inline]
    pub fn node_y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.hy()
    }

    /// Trapezoid quadrature weight of node `(i, j)` including the cell area
    /// factor `hx * hy`.
    #[inline]
    pub fn quad_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        wx * wy * self.hx() * self.hy()
    }

    /// All quadrature weights as a flat vector in node order.
    pub fn quad_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.n_nodes());
        for j in 0..self.ny {
            for i in 0..self.nx {
                w.push(self.quad_weight(i, j));
            }
        }
        w
    }
}

/// Nodal scalar field over a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2D,
    /// Row-major nodal values, length `grid.n_nodes()`.
    pub values: Vec<f64>,
}

impl ScalarField {
    /// Zero field.
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField { grid, values: vec![0.0; grid.n_nodes()] }
    }

    /// Constant field.
    pub fn constant(grid: Grid2D, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.n_nodes()] }
    }

    /// Field sampled from a function of the node coordinates.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.node_x(i), grid.node_y(j)));
            }
        }
        ScalarField { grid, values }
    }

    /// Wraps an existing value vector, validating its length.
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::domain(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    /// Value at node `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// `self += coeff * other` (element-wise).
    pub fn axpy(&mut self, coeff: f64, other: &ScalarField) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += coeff * b;
        }
    }

    /// `self *= coeff`.
    pub fn scale(&mut self, coeff: f64) {
        for a in &mut self.values {
            *a *= coeff;
        }
    }

    /// Discrete L2 inner product (trapezoid weights).
    pub fn l2_inner(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        let mut acc = 0.0;
        let mut k = 0;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                acc += self.grid.quad_weight(i, j) * self.values[k] * other.values[k];
                k += 1;
            }
        }
        acc
    }

    /// Discrete weighted inner product `(w a, b)` for a nodal weight field
    /// (used for density-weighted norms).
    pub fn l2_inner_weighted(&self, weight: &ScalarField, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        debug_assert_eq!(self.values.len(), weight.values.len());
        let mut acc = 0.0;
        let mut k = 0;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                acc += self.grid.quad_weight(i, j) * weight.values[k] * self.values[k] * other.values[k];
                k += 1;
            }
        }
        acc
    }

    /// Discrete L2 norm.
    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).sqrt()
    }

    /// Maximum absolute nodal value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Uniform time grid on `[0, t_end]` with `nt` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub nt: usize,
}

impl TimeGrid {
    /// Builds a time grid, requiring `t_end > 0` and at least 2 steps.
    pub fn new(t_end: f64, nt: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::domain("time horizon must be finite and positive"));
        }
        if nt < 2 {
            return Err(Error::domain("time grids need at least 2 steps"));
        }
        Ok(TimeGrid { t_end, nt })
    }

    /// Step size.
    #[inline]
    pub fn tau(&self) -> f64 {
        self.t_end / self.nt as f64
    }

    /// Time of node `n` (`n = 0..=nt`).
    #[inline]
    pub fn node(&self, n: usize) -> f64 {
        self.tau() * n as f64
    }

    /// Samples a function of time at all `nt + 1` nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=self.nt).map(|n| f(self.node(n))).collect()
    }

    /// Trapezoid weight of time node `n` (1/2 at the ends, 1 inside); the
    /// step size is *not* included.
    #[inline]
    pub fn trap_weight(&self, n: usize) -> f64 {
        if n == 0 || n == self.nt {
            0.5
        } else {
            1.0
        }
    }
}

/// Space-time field: `nt + 1` nodal snapshots over a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub timegrid: TimeGrid,
    pub snapshots: Vec<ScalarField>,
}

impl SpaceTimeField {
    /// All-zero field.
    pub fn zeros(grid: Grid2D, timegrid: TimeGrid) -> Self {
        SpaceTimeField {
            timegrid,
            snapshots: (0..=timegrid.nt).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Wraps snapshots, validating the count against the time grid.
    pub fn from_snapshots(timegrid: TimeGrid, snapshots: Vec<ScalarField>) -> Result<Self> {
        if snapshots.len() != timegrid.nt + 1 {
            return Err(Error::domain(format!(
                "expected {} snapshots, got {}",
                timegrid.nt + 1,
                snapshots.len()
            )));
        }
        Ok(SpaceTimeField { timegrid, snapshots })
    }

    /// Spatial grid of the snapshots.
    pub fn grid(&self) -> Grid2D {
        self.snapshots[0].grid
    }

    /// Space-time L2 norm with trapezoid quadrature in both space and time.
    pub fn l2_norm(&self) -> f64 {
        let tau = self.timegrid.tau();
        let mut acc = 0.0;
        for (n, snap) in self.snapshots.iter().enumerate() {
            acc += tau * self.timegrid.trap_weight(n) * snap.l2_inner(snap);
        }
        acc.sqrt()
    }

    /// Space-time L2 norm restricted to the nodes where `mask` is true.
    pub fn l2_norm_masked(&self, mask: &[bool]) -> f64 {
        let grid = self.grid();
        let tau = self.timegrid.tau();
        let mut acc = 0.0;
        for (n, snap) in self.snapshots.iter().enumerate() {
            let wt = tau * self.timegrid.trap_weight(n);
            let mut k = 0;
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    if mask[k] {
                        acc += wt * grid.quad_weight(i, j) * snap.values[k] * snap.values[k];
                    }
                    k += 1;
                }
            }
        }
        acc.sqrt()
    }
}

/// Separated source `sigma(t) * g(x)` with the temporal factor sampled at
/// the time nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedSource {
    /// Temporal factor at the `nt + 1` time nodes.
    pub sigma: Vec<f64>,
    /// Spatial factor.
    pub g: ScalarField,
    /// Whether `sigma` vanishes (to within a small tolerance relative to its
    /// peak) at and near the final time; several transform-based checks
    /// require this.
    pub compact_support: bool,
}

impl SeparatedSource {
    /// Builds a separated source, validating the sample count and flagging
    /// compact support when the last 2% of samples stay below `1e-6` of the
    /// peak amplitude.
    pub fn new(sigma: Vec<f64>, g: ScalarField, timegrid: TimeGrid) -> Result<Self> {
        if sigma.len() != timegrid.nt + 1 {
            return Err(Error::domain(format!(
                "sigma has {} samples but the time grid has {} nodes",
                sigma.len(),
                timegrid.nt + 1
            )));
        }
        if sigma.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("sigma samples must be finite"));
        }
        let peak = sigma.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        let tail_start = sigma.len() - (sigma.len() / 50).max(1);
        let compact_support =
            peak > 0.0 && sigma[tail_start..].iter().all(|s| s.abs() <= 1e-6 * peak);
        Ok(SeparatedSource { sigma, g, compact_support })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate_extents() {
        assert!(Grid2D::new(0.0, 0.0, 0.0, 1.0, 4, 4).is_err());
        assert!(Grid2D::new(0.0, 1.0, 0.0, 1.0, 2, 4).is_err());
        assert!(Grid2D::new(0.0, f64::NAN, 0.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn quadrature_weights_sum_to_area() {
        let grid = Grid2D::new(0.0, 2.0, 0.0, 3.0, 9, 13).unwrap();
        let total: f64 = grid.quad_weights().iter().sum();
        assert!((total - 6.0).abs() < 1e-12, "weights summed to {total}");
    }

    #[test]
    fn field_norm_of_constant_matches_area() {
        let grid = Grid2D::unit_square(17, 9).unwrap();
        let f = ScalarField::constant(grid, 3.0);
        assert!((f.l2_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_exact_for_bilinear_fields() {
        // The tensor trapezoid rule integrates bilinear functions exactly.
        let grid = Grid2D::unit_square(7, 11).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| x * y);
        let one = ScalarField::constant(grid, 1.0);
        assert!((f.l2_inner(&one) - 0.25).abs() < 1e-13);
    }

    #[test]
    fn node_ordering_is_row_major_by_y() {
        let grid = Grid2D::unit_square(3, 3).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| x + 10.0 * y);
        // Node (i=2, j=1) lives at flat index 1*3+2 = 5.
        assert_eq!(f.values[5], grid.node_x(2) + 10.0 * grid.node_y(1));
    }

    #[test]
    fn timegrid_samples_and_weights() {
        let tg = TimeGrid::new(2.0, 4).unwrap();
        assert_eq!(tg.tau(), 0.5);
        let s = tg.sample(|t| t * t);
        assert_eq!(s.len(), 5);
        assert_eq!(s[4], 4.0);
        assert_eq!(tg.trap_weight(0), 0.5);
        assert_eq!(tg.trap_weight(2), 1.0);
        assert_eq!(tg.trap_weight(4), 0.5);
    }

    #[test]
    fn separated_source_flags_compact_support() {
        let grid = Grid2D::unit_square(3, 3).unwrap();
        let tg = TimeGrid::new(1.0, 100).unwrap();
        let g = ScalarField::constant(grid, 1.0);
        // A pulse that dies out well before the final time.
        let sigma = tg.sample(|t| (-(t - 0.3) * (t - 0.3) / 0.002).exp());
        let src = SeparatedSource::new(sigma, g.clone(), tg).unwrap();
        assert!(src.compact_support);
        // A ramp that is still large at the final time.
        let ramp = SeparatedSource::new(tg.sample(|t| t), g, tg).unwrap();
        assert!(!ramp.compact_support);
    }

    #[test]
    fn spacetime_norm_matches_hand_value() {
        let grid = Grid2D::unit_square(3, 3).unwrap();
        let tg = TimeGrid::new(1.0, 2).unwrap();
        // Constant-in-space, linear-in-time field: ||u||^2 = int_0^1 t^2 dt
        // approximated by the trapezoid rule = (0 + 2*0.25 + 1)/2 * 0.5.
        let snaps = (0..=2).map(|n| ScalarField::constant(grid, tg.node(n))).collect();
        let u = SpaceTimeField::from_snapshots(tg, snaps).unwrap();
        let expected = (0.5 * (0.25 * 2.0 + 1.0) * 0.5_f64).sqrt();
        assert!((u.l2_norm() - expected).abs() < 1e-12);
    }
}
