//! The exact solution operator of `-phi'' = h`, `phi(a) = phi(b) = 0`.
//!
//! `S(h)(x) = ((x-a)/(b-a)) int_a^b (b-t) h(t) dt - int_a^x (x-t) h(t) dt`,
//! equivalently the Green kernel `G(x,t) = (min(x,t)-a)(b-max(x,t))/(b-a)`
//! integrated against `h`. The operator is assembled once per grid as a
//! dense kernel-quadrature matrix; the cell containing the evaluation point
//! is split at the kink of `G` and integrated exactly against the local
//! interpolant, so polynomial data is reproduced to machine precision.
//!
//! For nonnegative `h` the solution is concave and pinched between sharp
//! multiples of the boundary distance:
//! `c_lower * delta <= S(h) <= c_upper * delta` with
//! `c_lower = (1/(b-a)) int h delta` (equality at the midpoint) and
//! `c_upper = (1/(b-a)) max(int (t-a) h, int (b-t) h)` (equality in the
//! limit at an endpoint).

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::{gauss_legendre_unit, lagrange_eval, GradedGrid};
use crate::gridfn::GridFn;
use crate::quad::{integrate, Weight};

/// Common surface of the interval and radial solution operators, enough for
/// the constructive solver to run against either geometry.
pub trait SolutionOperator {
    fn grid(&self) -> &Arc<GradedGrid>;
    /// `S(h)` at the quadrature abscissae.
    fn apply(&self, h: &GridFn) -> GridFn;
    /// `S(h)(x)` at an arbitrary point of the closed domain.
    fn eval(&self, h: &GridFn, x: f64) -> f64;
    /// Distance to the boundary at the abscissae.
    fn delta(&self) -> &[f64];
    fn delta_at(&self, x: f64) -> f64;
    /// Exponent `e` of the volume measure `x^e dx` (0 on intervals,
    /// `N - 1` on balls); used by weak-form functionals.
    fn measure_exponent(&self) -> i32;
}

/// Dense kernel-quadrature realization of the interval operator.
pub struct GreenOperator {
    grid: Arc<GradedGrid>,
    /// Row-major `m x m` matrix: `S(h)_i = sum_j matrix[i*m+j] h_j`.
    matrix: Vec<f64>,
}

impl GreenOperator {
    pub fn new(grid: &Arc<GradedGrid>) -> Self {
        let m = grid.n_points();
        let order = grid.order();
        let len = grid.domain().length();
        let off_a = grid.point_offsets_a();
        let off_b = grid.point_offsets_b();
        let (sub_t, sub_w) = gauss_legendre_unit(order.max(4));
        let mut matrix = vec![0.0; m * m];
        for i in 0..m {
            let row = &mut matrix[i * m..(i + 1) * m];
            let ci = grid.cell_of_point(i);
            for c in 0..grid.n_cells() {
                if c != ci {
                    for j in grid.cell_points(c) {
                        let g = if j < i {
                            off_a[j] * off_b[i] / len
                        } else {
                            off_a[i] * off_b[j] / len
                        };
                        row[j] += g * grid.weights()[j];
                    }
                }
            }
            // The kernel kinks at t = x_i inside cell ci: split there and
            // integrate G times the Lagrange basis exactly (degree <= 4).
            let q = i - ci * order;
            let t_i = grid.ref_nodes()[q];
            let w_c = grid.cell_width(ci);
            let node_a = grid.node_offsets_a()[ci];
            let node_b = grid.node_offsets_b()[ci + 1];
            let x0 = grid.nodes()[ci];
            let cell_pts: Vec<f64> = grid.cell_points(ci).map(|j| grid.points()[j]).collect();
            let mut add_segment = |t_lo: f64, t_hi: f64, left_of_point: bool| {
                let span = t_hi - t_lo;
                if span <= 0.0 {
                    return;
                }
                for (&tq, &wq) in sub_t.iter().zip(&sub_w) {
                    let t = t_lo + tq * span;
                    let s_off_a = node_a + t * w_c;
                    let s_off_b = node_b + (1.0 - t) * w_c;
                    let g = if left_of_point {
                        s_off_a * off_b[i] / len
                    } else {
                        off_a[i] * s_off_b / len
                    };
                    let x_s = x0 + t * w_c;
                    let scale = wq * span * w_c * g;
                    for (k, j) in grid.cell_points(ci).enumerate() {
                        let mut ell = 1.0;
                        for (kk, &xp) in cell_pts.iter().enumerate() {
                            if kk != k {
                                ell *= (x_s - xp) / (cell_pts[k] - xp);
                            }
                        }
                        row[j] += scale * ell;
                    }
                }
            };
            add_segment(0.0, t_i, true);
            add_segment(t_i, 1.0, false);
        }
        Self {
            grid: grid.clone(),
            matrix,
        }
    }

    /// Boundary derivatives of `S(h)`:
    /// `phi'(a) = int (b-t) h / (b-a)`, `phi'(b) = -int (t-a) h / (b-a)`.
    pub fn boundary_slopes(&self, h: &GridFn) -> (f64, f64) {
        let len = self.grid.domain().length();
        let right = integrate(h, Weight::Right).expect("polynomial weight");
        let left = integrate(h, Weight::Left).expect("polynomial weight");
        (right / len, -left / len)
    }
}

impl SolutionOperator for GreenOperator {
    fn grid(&self) -> &Arc<GradedGrid> {
        &self.grid
    }

    fn apply(&self, h: &GridFn) -> GridFn {
        assert!(
            Arc::ptr_eq(h.grid(), &self.grid),
            "operator and function must share a grid"
        );
        let m = self.grid.n_points();
        let v = h.values();
        let out: Vec<f64> = self
            .matrix
            .chunks_exact(m)
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect();
        GridFn::new(self.grid.clone(), out)
    }

    fn eval(&self, h: &GridFn, x: f64) -> f64 {
        let dom = self.grid.domain();
        if x <= dom.a() || x >= dom.b() {
            return 0.0;
        }
        let len = dom.length();
        let off_a_x = x - dom.a();
        let off_b_x = dom.b() - x;
        let cx = self.grid.cell_containing(x);
        let grid = &self.grid;
        let v = h.values();
        let mut acc = 0.0;
        for c in 0..grid.n_cells() {
            if c != cx {
                for j in grid.cell_points(c) {
                    let g = if grid.points()[j] < x {
                        grid.point_offsets_a()[j] * off_b_x / len
                    } else {
                        off_a_x * grid.point_offsets_b()[j] / len
                    };
                    acc += g * grid.weights()[j] * v[j];
                }
            }
        }
        let (sub_t, sub_w) = gauss_legendre_unit(grid.order().max(4));
        let w_c = grid.cell_width(cx);
        let node_a = grid.node_offsets_a()[cx];
        let node_b = grid.node_offsets_b()[cx + 1];
        let x0 = grid.nodes()[cx];
        let t_x = ((x - x0) / w_c).clamp(0.0, 1.0);
        let rng = grid.cell_points(cx);
        let cell_pts = &grid.points()[rng.clone()];
        let cell_vals = &v[rng];
        let seg = |t_lo: f64, t_hi: f64, left: bool| {
            let span = t_hi - t_lo;
            if span <= 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for (&tq, &wq) in sub_t.iter().zip(&sub_w) {
                let t = t_lo + tq * span;
                let s_off_a = node_a + t * w_c;
                let s_off_b = node_b + (1.0 - t) * w_c;
                let g = if left {
                    s_off_a * off_b_x / len
                } else {
                    off_a_x * s_off_b / len
                };
                let p = lagrange_eval(cell_pts, cell_vals, x0 + t * w_c);
                s += wq * g * p;
            }
            s * span * w_c
        };
        acc += seg(0.0, t_x, true);
        acc += seg(t_x, 1.0, false);
        acc
    }

    fn delta(&self) -> &[f64] {
        self.grid.deltas()
    }

    fn delta_at(&self, x: f64) -> f64 {
        self.grid.domain().delta(x)
    }

    fn measure_exponent(&self) -> i32 {
        0
    }
}

/// The sharp distance-comparison coefficients of `S(h)` for `h >= 0`,
/// together with their measured counterparts on the computed solution.
#[derive(Debug, Clone, Copy)]
pub struct ConeCoefficients {
    pub c_lower: f64,
    pub c_upper: f64,
    pub measured_inf_ratio: f64,
    pub measured_sup_ratio: f64,
}

/// Compute the sharp coefficients for nonnegative, not identically zero `h`.
pub fn cone_coefficients(op: &GreenOperator, h: &GridFn) -> Result<ConeCoefficients> {
    let scale = h.max_abs();
    if h.min_value() < -1e-12 * (1.0 + scale) {
        return Err(CoreError::InvalidProblem(
            "cone coefficients require a nonnegative function".into(),
        ));
    }
    if scale == 0.0 {
        return Err(CoreError::InvalidProblem(
            "cone coefficients require h not identically zero".into(),
        ));
    }
    let dom = op.grid().domain();
    let len = dom.length();
    let c_lower = integrate(h, Weight::Delta)? / len;
    let c_upper = integrate(h, Weight::Left)?.max(integrate(h, Weight::Right)?) / len;
    let phi = op.apply(h);
    let ratios = phi.over_delta();
    // The infimum of phi/delta is attained at the midpoint, which is a cell
    // boundary, so evaluate there explicitly as well.
    let mid = dom.midpoint();
    let mid_ratio = op.eval(h, mid) / dom.delta(mid);
    let measured_inf_ratio = ratios.min_value().min(mid_ratio);
    // The supremum is attained in the limit at an endpoint; the first and
    // last abscissae act as one-sided difference quotients there.
    let measured_sup_ratio = ratios.max_value();
    Ok(ConeCoefficients {
        c_lower,
        c_upper,
        measured_inf_ratio,
        measured_sup_ratio,
    })
}
