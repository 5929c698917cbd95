//! Power-graded meshes with per-cell Gauss-Legendre quadrature.
//!
//! Nodes cluster toward both endpoints like `(i/n)^grading`, which resolves
//! integrable endpoint singularities `delta^{-gamma}` at an algebraic rate.
//! Every sampled function is carried by its values at the quadrature
//! abscissae; within a cell it is identified with the Lagrange interpolant
//! through those points.
//!
//! Offsets of nodes and abscissae from the nearest endpoint are computed
//! directly from the grading map, never as differences of absolute
//! coordinates, so that `delta` stays accurate down to widths near machine
//! epsilon even on translated intervals.

use std::sync::Arc;

use crate::domain::Domain1D;
use crate::error::{CoreError, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`,
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule order must be positive");
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root of P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = if n == 1 {
                1.0
            } else {
                n as f64 * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        // Map from [-1, 1] to [0, 1]; roots come out descending in x.
        xs[n - 1 - i] = 0.5 * (x + 1.0);
        ws[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// A graded mesh of `n` cells over an interval together with its composite
/// Gauss-Legendre rule.
#[derive(Debug)]
pub struct GradedGrid {
    domain: Domain1D,
    n_cells: usize,
    grading: f64,
    order: usize,
    /// Cell boundaries, `n + 1` of them, strictly increasing.
    nodes: Vec<f64>,
    /// Node offsets from `a` (exact on the left half).
    node_off_a: Vec<f64>,
    /// Node offsets from `b` (exact on the right half).
    node_off_b: Vec<f64>,
    /// Quadrature abscissae, `n * order`, strictly increasing.
    points: Vec<f64>,
    /// Abscissa offsets from `a` and from `b`.
    pt_off_a: Vec<f64>,
    pt_off_b: Vec<f64>,
    /// Composite quadrature weights.
    weights: Vec<f64>,
    /// `delta = min(offset from a, offset from b)` at the abscissae.
    deltas: Vec<f64>,
    /// Reference rule on [0, 1].
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

/// Default points-per-cell for the composite rule.
pub const DEFAULT_ORDER: usize = 4;

/// Default grading exponent for a problem that integrates `delta^{-gamma}`
/// weights: `max(2, 2/(1-gamma))`, capped for exponents close to 1.
pub fn default_grading(gamma: f64) -> f64 {
    if gamma >= 1.0 {
        6.0
    } else {
        (2.0f64).max(2.0 / (1.0 - gamma)).min(6.0)
    }
}

/// Build a graded mesh of `n` cells on `domain` with the given grading
/// exponent and the default 4-point rule per cell.
pub fn build_grid(domain: Domain1D, n: usize, grading: f64) -> Result<Arc<GradedGrid>> {
    GradedGrid::with_order(domain, n, grading, DEFAULT_ORDER)
}

impl GradedGrid {
    pub fn with_order(domain: Domain1D, n: usize, grading: f64, order: usize) -> Result<Arc<Self>> {
        if n < 8 {
            return Err(CoreError::InvalidGrid(format!(
                "at least 8 cells required, got {n}"
            )));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(CoreError::InvalidGrid(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        if !(2..=16).contains(&order) {
            return Err(CoreError::InvalidGrid(format!(
                "points per cell must lie in 2..=16, got {order}"
            )));
        }
        let len = domain.length();
        let half = 0.5 * len;
        // Offset of node i from its nearest endpoint under the grading map.
        let side_off =
            |steps: usize| -> f64 { half * (2.0 * steps as f64 / n as f64).powf(grading) };
        let mut node_off_a = vec![0.0; n + 1];
        let mut node_off_b = vec![0.0; n + 1];
        for i in 0..=n {
            if 2 * i <= n {
                node_off_a[i] = side_off(i);
                node_off_b[i] = len - node_off_a[i];
            } else {
                node_off_b[i] = side_off(n - i);
                node_off_a[i] = len - node_off_b[i];
            }
        }
        let mut nodes = vec![0.0; n + 1];
        for i in 0..=n {
            nodes[i] = if 2 * i <= n {
                domain.a() + node_off_a[i]
            } else {
                domain.b() - node_off_b[i]
            };
        }
        for i in 0..n {
            if nodes[i + 1] <= nodes[i] {
                return Err(CoreError::InvalidGrid(format!(
                    "grading {grading} with {n} cells collapses cell {i} below resolution"
                )));
            }
        }

        let (ref_nodes, ref_weights) = gauss_legendre_unit(order);
        let m = n * order;
        let mut points = vec![0.0; m];
        let mut pt_off_a = vec![0.0; m];
        let mut pt_off_b = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mut deltas = vec![0.0; m];
        for c in 0..n {
            let w = Self::cell_width_from(&node_off_a, &node_off_b, n, c);
            for q in 0..order {
                let j = c * order + q;
                let xi = ref_nodes[q];
                pt_off_a[j] = node_off_a[c] + xi * w;
                pt_off_b[j] = node_off_b[c + 1] + (1.0 - xi) * w;
                points[j] = if 2 * c < n {
                    domain.a() + pt_off_a[j]
                } else {
                    domain.b() - pt_off_b[j]
                };
                weights[j] = ref_weights[q] * w;
                deltas[j] = pt_off_a[j].min(pt_off_b[j]);
            }
        }

        Ok(Arc::new(Self {
            domain,
            n_cells: n,
            grading,
            order,
            nodes,
            node_off_a,
            node_off_b,
            points,
            pt_off_a,
            pt_off_b,
            weights,
            deltas,
            ref_nodes,
            ref_weights,
        }))
    }

    fn cell_width_from(off_a: &[f64], off_b: &[f64], n: usize, c: usize) -> f64 {
        if 2 * (c + 1) <= n {
            off_a[c + 1] - off_a[c]
        } else if 2 * c >= n {
            off_b[c] - off_b[c + 1]
        } else {
            // Cell straddling the midpoint (odd n only).
            off_a[c + 1] - off_a[c]
        }
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn point_offsets_a(&self) -> &[f64] {
        &self.pt_off_a
    }

    pub fn point_offsets_b(&self) -> &[f64] {
        &self.pt_off_b
    }

    pub fn node_offsets_a(&self) -> &[f64] {
        &self.node_off_a
    }

    pub fn node_offsets_b(&self) -> &[f64] {
        &self.node_off_b
    }

    pub fn cell_width(&self, c: usize) -> f64 {
        Self::cell_width_from(&self.node_off_a, &self.node_off_b, self.n_cells, c)
    }

    pub fn cell_of_point(&self, j: usize) -> usize {
        j / self.order
    }

    /// Index range of the abscissae belonging to cell `c`.
    pub fn cell_points(&self, c: usize) -> std::ops::Range<usize> {
        c * self.order..(c + 1) * self.order
    }

    /// Cell containing `x` (endpoints map to the first/last cell).
    pub fn cell_containing(&self, x: f64) -> usize {
        let n = self.n_cells;
        let i = self.nodes.partition_point(|&t| t <= x);
        i.saturating_sub(1).min(n - 1)
    }

    /// Local Gauss abscissa fractions within a cell, in `(0, 1)`.
    pub fn ref_nodes(&self) -> &[f64] {
        &self.ref_nodes
    }

    pub fn ref_weights(&self) -> &[f64] {
        &self.ref_weights
    }

    /// Does cell `c` contain the midpoint strictly inside (odd `n` only)?
    pub fn cell_straddles_midpoint(&self, c: usize) -> bool {
        2 * c < self.n_cells && 2 * (c + 1) > self.n_cells
    }

    /// Evaluate the Lagrange interpolant of `values` (one per abscissa of
    /// cell `c`) at `x`.
    pub fn interpolate_in_cell(&self, c: usize, values: &[f64], x: f64) -> f64 {
        let pts = &self.points[self.cell_points(c)];
        lagrange_eval(pts, values, x)
    }
}

/// Barycentric-free Lagrange evaluation through distinct points.
pub fn lagrange_eval(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut acc = 0.0;
    for k in 0..n {
        let mut l = vs[k];
        for j in 0..n {
            if j != k {
                l *= (x - xs[j]) / (xs[k] - xs[j]);
            }
        }
        acc += l;
    }
    acc
}

/// Monomial coefficients (ascending degree) of the polynomial interpolating
/// `(xs[k], vs[k])`, via Newton divided differences.
pub fn monomial_coefficients(xs: &[f64], vs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut dd = vs.to_vec();
    for level in 1..n {
        for k in (level..n).rev() {
            dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - level]);
        }
    }
    // Expand the Newton form sum dd[k] prod_{j<k} (x - xs[j]) by Horner:
    // p <- p * (x - xs[k]) + dd[k], from the top coefficient down.
    let mut coef = vec![0.0; n];
    coef[0] = dd[n - 1];
    let mut deg = 0usize;
    for k in (0..n - 1).rev() {
        deg += 1;
        for j in (1..=deg).rev() {
            coef[j] = coef[j - 1] - xs[k] * coef[j];
        }
        coef[0] = dd[k] - xs[k] * coef[0];
    }
    coef
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for order in [2usize, 3, 4, 8, 16] {
            let (xs, ws) = gauss_legendre_unit(order);
            assert_eq!(xs.len(), order);
            // Exact through degree 2*order - 1.
            for deg in 0..2 * order {
                let quad: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, &w)| w * x.powi(deg as i32))
                    .sum();
                assert_relative_eq!(quad, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn uniform_grid_when_grading_is_one() {
        let d = Domain1D::new(0.0, 1.0).unwrap();
        let g = build_grid(d, 8, 1.0).unwrap();
        for (i, &x) in g.nodes().iter().enumerate() {
            assert_relative_eq!(x, i as f64 / 8.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn affine_image_of_uniform_mesh() {
        let d = Domain1D::new(-2.0, 3.0).unwrap();
        let g = build_grid(d, 16, 1.0).unwrap();
        assert_relative_eq!(g.nodes()[0], -2.0);
        assert_relative_eq!(g.nodes()[1], -1.6875, epsilon = 1e-14);
        assert_relative_eq!(g.nodes()[16], 3.0);
    }

    #[test]
    fn graded_first_cell_width_matches_map() {
        // Oracle: evaluate the grading map at i = 1 by hand.
        let d = Domain1D::new(0.0, 1.0).unwrap();
        let g = build_grid(d, 100, 2.0).unwrap();
        let expect = 0.5 * (2.0f64 / 100.0).powi(2);
        assert_relative_eq!(g.nodes()[1], expect, max_relative = 1e-14);
        assert_relative_eq!(g.cell_width(0), expect, max_relative = 1e-14);
        // Symmetry about the midpoint.
        assert_relative_eq!(g.cell_width(99), expect, max_relative = 1e-14);
        assert_relative_eq!(g.nodes()[50], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn refinement_nests_node_clustering() {
        let d = Domain1D::new(0.0, 1.0).unwrap();
        let coarse = build_grid(d, 40, 3.0).unwrap();
        let fine = build_grid(d, 80, 3.0).unwrap();
        for i in 0..=40 {
            assert_relative_eq!(coarse.nodes()[i], fine.nodes()[2 * i], epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_small_or_ungraded() {
        let d = Domain1D::new(0.0, 1.0).unwrap();
        assert!(build_grid(d, 4, 1.0).is_err());
        assert!(build_grid(d, 16, 0.5).is_err());
    }

    #[test]
    fn deltas_match_min_offset() {
        let d = Domain1D::new(-1.0, 2.0).unwrap();
        let g = build_grid(d, 64, 2.5).unwrap();
        for j in 0..g.n_points() {
            let x = g.points()[j];
            assert_relative_eq!(g.deltas()[j], (x + 1.0).min(2.0 - x), max_relative = 1e-12);
        }
        // Weights sum to the interval length.
        let total: f64 = g.weights().iter().sum();
        assert_relative_eq!(total, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn monomial_conversion_reproduces_cubic() {
        let xs = [0.1, 0.35, 0.6, 0.95];
        let f = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x * x * x;
        let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let c = monomial_coefficients(&xs, &vs);
        assert_relative_eq!(c[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(c[1], -1.0, max_relative = 1e-12);
        assert_relative_eq!(c[2], 3.0, max_relative = 1e-12);
        assert_relative_eq!(c[3], -0.5, max_relative = 1e-12);
    }

    #[test]
    fn odd_cell_counts_are_supported() {
        let d = Domain1D::new(0.0, 1.0).unwrap();
        let g = build_grid(d, 9, 2.0).unwrap();
        assert_eq!(g.n_cells(), 9);
        let straddles: Vec<usize> = (0..9).filter(|&c| g.cell_straddles_midpoint(c)).collect();
        assert_eq!(straddles, vec![4]);
        let total: f64 = g.weights().iter().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-14);
    }
}
