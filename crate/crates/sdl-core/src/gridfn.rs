//! Functions sampled at the quadrature abscissae of a graded grid.
//!
//! A `GridFn` is the numerical carrier for every coefficient and solution in
//! the library. Values are immutable after construction; all arithmetic
//! returns fresh functions on the same (shared) grid.

use std::sync::Arc;

use crate::grid::GradedGrid;

#[derive(Debug, Clone)]
pub struct GridFn {
    grid: Arc<GradedGrid>,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(grid: Arc<GradedGrid>, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            grid.n_points(),
            "one value per quadrature abscissa"
        );
        Self { grid, values }
    }

    pub fn from_fn(grid: &Arc<GradedGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn zeros(grid: &Arc<GradedGrid>) -> Self {
        Self::new(grid.clone(), vec![0.0; grid.n_points()])
    }

    pub fn grid(&self) -> &Arc<GradedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFn) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &GridFn, f: impl Fn(f64, f64) -> f64) -> GridFn {
        assert!(self.same_grid(other), "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridFn::new(self.grid.clone(), values)
    }

    pub fn scale(&self, c: f64) -> GridFn {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &GridFn) -> GridFn {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFn) -> GridFn {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFn) -> GridFn {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn powf(&self, e: f64) -> GridFn {
        self.map(|v| v.powf(e))
    }

    pub fn positive_part(&self) -> GridFn {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> GridFn {
        self.map(|v| (-v).max(0.0))
    }

    pub fn abs(&self) -> GridFn {
        self.map(f64::abs)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &GridFn) -> f64 {
        assert!(self.same_grid(other), "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Values divided by the boundary distance, the cone-membership ratio.
    pub fn over_delta(&self) -> GridFn {
        let deltas = self.grid.deltas();
        let values = self
            .values
            .iter()
            .zip(deltas)
            .map(|(&v, &d)| v / d)
            .collect();
        GridFn::new(self.grid.clone(), values)
    }

    /// Evaluate the per-cell Lagrange interpolant at an arbitrary point.
    pub fn eval_at(&self, x: f64) -> f64 {
        let c = self.grid.cell_containing(x);
        let rng = self.grid.cell_points(c);
        self.grid.interpolate_in_cell(c, &self.values[rng], x)
    }

    /// True when all values are finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
