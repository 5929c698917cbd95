//! The radial theory on balls `B_R` in dimension `N >= 2`.
//!
//! `-Delta` reduces on radial functions to `-(r^{N-1} phi')' = r^{N-1} h`
//! with `phi'(0) = 0`, `phi(R) = 0`, solved by double integration:
//! `phi(r) = int_r^R t^{1-N} (int_0^t s^{N-1} h(s) ds) dt`, i.e. the kernel
//! `k(r, s) = s^{N-1} J(max(r, s))` with `J(m) = int_m^R t^{1-N} dt`.
//!
//! The two-sided distance comparison
//! `c_Omega (int_Omega h delta) delta <= S(h) <= C_Omega ||h||_{L^q} delta`
//! holds with constants depending only on the domain; the paper gives no
//! numbers, so `MorelConstants` are either user supplied or estimated from
//! a fixed family of radial test loads and re-validated on a held-out
//! family. Certificates computed from estimated constants are labelled
//! empirical.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certificates::{CertificateId, CertificateReport};
use crate::domain::BallDomain;
use crate::error::{CoreError, Result};
use crate::funcspec::{support_interval, FunctionSpec};
use crate::greens::SolutionOperator;
use crate::grid::{gauss_legendre_unit, lagrange_eval, GradedGrid};
use crate::gridfn::GridFn;
use crate::quad::{integrate, Weight};

/// Radial problem data on a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub ball: BallDomain,
    pub k: FunctionSpec,
    pub m: FunctionSpec,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub p: f64,
}

impl RadialProblem {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::InvalidProblem(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.p > self.ball.dim() as f64) {
            return Err(CoreError::InvalidProblem(format!(
                "radial problems need p > N = {}, got {}",
                self.ball.dim(),
                self.p
            )));
        }
        let slice = self.ball.radial_interval();
        self.k.validate(&slice)?;
        self.m.validate(&slice)?;
        Ok(())
    }

    pub fn sample(&self, grid: &Arc<GradedGrid>) -> Result<SampledRadial> {
        self.validate()?;
        let slice = self.ball.radial_interval();
        if grid.domain() != &slice {
            return Err(CoreError::InvalidProblem(format!(
                "radial grid must live on (0, {}), got ({}, {})",
                self.ball.radius(),
                grid.domain().a(),
                grid.domain().b()
            )));
        }
        let sample_nonneg = |f: &FunctionSpec, name: &str| -> Result<GridFn> {
            let h = f.sample(grid)?;
            if h.min_value() < -1e-12 * (1.0 + h.max_abs()) {
                return Err(CoreError::InvalidProblem(format!(
                    "{name} must be nonnegative"
                )));
            }
            Ok(h.map(|v| v.max(0.0)))
        };
        let k = sample_nonneg(&self.k, "K")?;
        let m = sample_nonneg(&self.m, "M")?;
        if integrate(&k, Weight::One)? <= 0.0 {
            return Err(CoreError::InvalidProblem(
                "K must have positive integral".into(),
            ));
        }
        Ok(SampledRadial {
            spec: self.clone(),
            grid: grid.clone(),
            k,
            m,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SampledRadial {
    pub spec: RadialProblem,
    pub grid: Arc<GradedGrid>,
    pub k: GridFn,
    pub m: GridFn,
}

/// Radial solution operator on a ball, assembled as a dense kernel matrix
/// over a graded grid on `(0, R)`.
pub struct RadialOperator {
    grid: Arc<GradedGrid>,
    ball: BallDomain,
    matrix: Vec<f64>,
}

impl RadialOperator {
    /// `J(m) = int_m^R t^{1-N} dt`.
    fn j_outer(ball: &BallDomain, m: f64) -> f64 {
        let nn = ball.dim() as f64;
        let rr = ball.radius();
        if ball.dim() == 2 {
            (rr / m).ln()
        } else {
            (m.powf(2.0 - nn) - rr.powf(2.0 - nn)) / (nn - 2.0)
        }
    }

    /// Kernel `k(r, s)`; for `s > r` the product `s^{N-1} J(s)` is expanded
    /// so that it stays finite as `s -> 0`.
    fn kernel(ball: &BallDomain, r: f64, s: f64) -> f64 {
        let nn = ball.dim() as f64;
        let rr = ball.radius();
        if s <= r {
            s.powf(nn - 1.0) * Self::j_outer(ball, r)
        } else if ball.dim() == 2 {
            s * (rr / s).ln()
        } else {
            (s - s.powf(nn - 1.0) * rr.powf(2.0 - nn)) / (nn - 2.0)
        }
    }

    pub fn new(grid: &Arc<GradedGrid>, ball: &BallDomain) -> Result<Self> {
        let slice = ball.radial_interval();
        if grid.domain() != &slice {
            return Err(CoreError::InvalidGrid(format!(
                "radial operator needs a grid on (0, {})",
                ball.radius()
            )));
        }
        let m = grid.n_points();
        let order = grid.order();
        let pts = grid.points();
        let (sub_t, sub_w) = gauss_legendre_unit(order.max(4));
        let mut matrix = vec![0.0; m * m];
        for i in 0..m {
            let r_i = pts[i];
            let row = &mut matrix[i * m..(i + 1) * m];
            let ci = grid.cell_of_point(i);
            for c in 0..grid.n_cells() {
                if c != ci {
                    for j in grid.cell_points(c) {
                        row[j] += Self::kernel(ball, r_i, pts[j]) * grid.weights()[j];
                    }
                }
            }
            // Split the kink of the kernel at s = r_i inside its own cell.
            let q = i - ci * order;
            let t_i = grid.ref_nodes()[q];
            let w_c = grid.cell_width(ci);
            let x0 = grid.nodes()[ci];
            let cell_pts: Vec<f64> = grid.cell_points(ci).map(|j| pts[j]).collect();
            let mut add_segment = |t_lo: f64, t_hi: f64| {
                let span = t_hi - t_lo;
                if span <= 0.0 {
                    return;
                }
                for (&tq, &wq) in sub_t.iter().zip(&sub_w) {
                    let s = x0 + (t_lo + tq * span) * w_c;
                    let scale = wq * span * w_c * Self::kernel(ball, r_i, s);
                    for (kk, j) in grid.cell_points(ci).enumerate() {
                        let mut ell = 1.0;
                        for (jj, &xp) in cell_pts.iter().enumerate() {
                            if jj != kk {
                                ell *= (s - xp) / (cell_pts[kk] - xp);
                            }
                        }
                        row[j] += scale * ell;
                    }
                }
            };
            add_segment(0.0, t_i);
            add_segment(t_i, 1.0);
        }
        Ok(Self {
            grid: grid.clone(),
            ball: *ball,
            matrix,
        })
    }

    pub fn ball(&self) -> &BallDomain {
        &self.ball
    }

    /// `phi'(R) = -R^{1-N} int_0^R s^{N-1} h(s) ds`.
    pub fn boundary_slope(&self, h: &GridFn) -> f64 {
        let nn = self.ball.dim() as f64;
        let moment: f64 = self
            .grid
            .weights()
            .iter()
            .zip(h.values())
            .zip(self.grid.points())
            .map(|((&w, &v), &r)| w * v * r.powf(nn - 1.0))
            .sum();
        -self.ball.radius().powf(1.0 - nn) * moment
    }
}

impl SolutionOperator for RadialOperator {
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

    fn eval(&self, h: &GridFn, r: f64) -> f64 {
        if r >= self.ball.radius() {
            return 0.0;
        }
        let r = r.max(0.0);
        let grid = &self.grid;
        let pts = grid.points();
        let cx = grid.cell_containing(r);
        let mut acc = 0.0;
        for c in 0..grid.n_cells() {
            if c != cx {
                for j in grid.cell_points(c) {
                    acc += Self::kernel(&self.ball, r, pts[j]) * grid.weights()[j] * h.values()[j];
                }
            }
        }
        let (sub_t, sub_w) = gauss_legendre_unit(grid.order().max(4));
        let w_c = grid.cell_width(cx);
        let x0 = grid.nodes()[cx];
        let t_x = ((r - x0) / w_c).clamp(0.0, 1.0);
        let rng = grid.cell_points(cx);
        let cell_pts = &pts[rng.clone()];
        let cell_vals = &h.values()[rng];
        let seg = |t_lo: f64, t_hi: f64| -> f64 {
            let span = t_hi - t_lo;
            if span <= 0.0 {
                return 0.0;
            }
            let mut s_acc = 0.0;
            for (&tq, &wq) in sub_t.iter().zip(&sub_w) {
                let s = x0 + (t_lo + tq * span) * w_c;
                let p = lagrange_eval(cell_pts, cell_vals, s);
                s_acc += wq * Self::kernel(&self.ball, r, s) * p;
            }
            s_acc * span * w_c
        };
        acc + seg(0.0, t_x) + seg(t_x, 1.0)
    }

    fn delta(&self) -> &[f64] {
        self.grid.point_offsets_b()
    }

    fn delta_at(&self, r: f64) -> f64 {
        self.ball.radius() - r
    }

    fn measure_exponent(&self) -> i32 {
        self.ball.dim() as i32 - 1
    }
}

/// Volume integral `int_{B_R} h delta dx = omega int_0^R h (R-r) r^{N-1} dr`.
pub fn ball_delta_moment(ball: &BallDomain, h: &GridFn) -> f64 {
    let grid = h.grid();
    let nn = ball.dim() as f64;
    let s: f64 = grid
        .weights()
        .iter()
        .zip(h.values())
        .zip(grid.points().iter().zip(grid.point_offsets_b()))
        .map(|((&w, &v), (&r, &d))| w * v * d * r.powf(nn - 1.0))
        .sum();
    ball.omega() * s
}

/// `||h||_{L^p(B_R)}`; `p` infinite gives the max abscissa value.
pub fn ball_lp_norm(ball: &BallDomain, h: &GridFn, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(h.max_abs());
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(CoreError::InvalidProblem(format!(
            "L^p norm requires p >= 1 or infinity, got {p}"
        )));
    }
    let grid = h.grid();
    let nn = ball.dim() as f64;
    let s: f64 = grid
        .weights()
        .iter()
        .zip(h.values())
        .zip(grid.points())
        .map(|((&w, &v), &r)| w * v.abs().powf(p) * r.powf(nn - 1.0))
        .sum();
    Ok((ball.omega() * s).powf(1.0 / p))
}

/// `||delta^{-gamma}||_{L^q(B_R)} = (omega int_0^R r^{N-1} (R-r)^{-gamma q} dr)^{1/q}`,
/// with the singular factor integrated exactly in the boundary cell.
pub fn ball_delta_negpow_norm(
    ball: &BallDomain,
    grid: &Arc<GradedGrid>,
    gamma: f64,
    q: f64,
) -> Result<f64> {
    if gamma * q >= 1.0 {
        return Err(CoreError::HypothesisViolated(format!(
            "gamma q = {} >= 1: delta^(-gamma) is not in L^q",
            gamma * q
        )));
    }
    let nn = ball.dim() as f64;
    let rpow = GridFn::from_fn(grid, |r| r.powf(nn - 1.0));
    let v = integrate(&rpow, Weight::RightPow(-gamma * q))?;
    Ok((ball.omega() * v).powf(1.0 / q))
}

/// Provenance of domain comparison constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UserSupplied,
    Estimated,
}

/// The constants of the two-sided comparison
/// `c_lower (int h delta) delta <= S(h) <= c_upper ||h||_{L^q} delta`.
///
/// Estimated constants certify exactly this delta-ratio inequality on the
/// validated family (the upper constant bounds a weaker functional than the
/// gradient-embedding constant it descends from).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorelConstants {
    pub c_lower: f64,
    pub c_upper: f64,
    pub q: f64,
    pub provenance: Provenance,
}

impl MorelConstants {
    pub fn user_supplied(c_lower: f64, c_upper: f64, q: f64) -> Result<Self> {
        if !(c_lower > 0.0 && c_upper > 0.0 && c_lower.is_finite() && c_upper.is_finite()) {
            return Err(CoreError::InvalidProblem(
                "comparison constants must be positive and finite".into(),
            ));
        }
        Ok(Self {
            c_lower,
            c_upper,
            q,
            provenance: Provenance::UserSupplied,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.c_lower / self.c_upper
    }

    pub fn is_estimated(&self) -> bool {
        self.provenance == Provenance::Estimated
    }
}

/// The radial test loads used to estimate the constants.
pub fn training_family(ball: &BallDomain, grid: &Arc<GradedGrid>) -> Vec<GridFn> {
    let rr = ball.radius();
    let mut fam: Vec<GridFn> = Vec::new();
    fam.push(GridFn::from_fn(grid, |_| 1.0));
    for s in [0.5, 1.0, 2.0, 4.0, 8.0] {
        fam.push(GridFn::from_fn(grid, move |r| (r / rr).powf(s)));
    }
    fam.push(GridFn::from_fn(grid, move |r| 1.0 - r / rr));
    for (c, w) in [(0.3, 0.15), (0.55, 0.1), (0.8, 0.08), (0.9, 0.05)] {
        let (c, w) = (c * rr, w * rr);
        fam.push(GridFn::from_fn(grid, move |r| {
            let z = (r - c) / w;
            if z.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - z * z)).exp()
            }
        }));
    }
    fam
}

/// A held-out family of 20 milder nonnegative radial loads for validation.
pub fn held_out_family(ball: &BallDomain, grid: &Arc<GradedGrid>) -> Vec<GridFn> {
    let rr = ball.radius();
    let mut fam: Vec<GridFn> = Vec::new();
    for s in [0.75, 1.5, 2.5, 3.0, 5.0] {
        fam.push(GridFn::from_fn(grid, move |r| (r / rr).powf(s)));
    }
    for c in [0.2, 0.35, 0.5, 0.65, 0.8] {
        let (c, w) = (c * rr, 0.12 * rr);
        fam.push(GridFn::from_fn(grid, move |r| {
            let z = (r - c) / w;
            if z.abs() >= 1.0 {
                0.0
            } else {
                2.0 * (1.0 - 1.0 / (1.0 - z * z)).exp()
            }
        }));
    }
    for a in [0.25, 0.5, 1.0, 2.0, 3.0] {
        fam.push(GridFn::from_fn(grid, move |r| {
            a + (1.0 - a / 4.0) * (r / rr) * (1.0 - r / rr)
        }));
    }
    for k in [1.0, 2.0] {
        fam.push(GridFn::from_fn(grid, move |r| {
            1.5 + (k * std::f64::consts::PI * r / rr).cos()
        }));
    }
    fam.push(GridFn::from_fn(grid, move |r| (1.0 - r / rr).powf(0.5)));
    fam.push(GridFn::from_fn(grid, move |r| {
        (r / rr).powf(2.0) * (1.0 - r / rr)
    }));
    fam.push(GridFn::from_fn(grid, move |r| (2.0 - r / rr).powf(1.5)));
    fam
}

/// Estimate the comparison constants from the training family:
/// `c_lower` is the smallest observed `inf_r S(h)/(delta int h delta)` and
/// `c_upper` the largest observed `sup_r S(h)/(delta ||h||_q)`, both
/// including the boundary limit via the derivative ratio at `r = R`.
pub fn estimate_morel_constants(op: &RadialOperator, q: f64) -> Result<MorelConstants> {
    let ball = *op.ball();
    if !(q > ball.dim() as f64) {
        return Err(CoreError::HypothesisViolated(format!(
            "the upper comparison needs q > N = {}, got {q}",
            ball.dim()
        )));
    }
    let grid = op.grid().clone();
    let deltas = op.delta().to_vec();
    let mut c_lower = f64::INFINITY;
    let mut c_upper: f64 = 0.0;
    for h in training_family(&ball, &grid) {
        let phi = op.apply(&h);
        let moment = ball_delta_moment(&ball, &h);
        let norm_q = ball_lp_norm(&ball, &h, q)?;
        let boundary_ratio = -op.boundary_slope(&h); // phi/delta -> |phi'(R)|
        let mut inf_ratio = boundary_ratio;
        let mut sup_ratio = boundary_ratio;
        for (j, &d) in deltas.iter().enumerate() {
            let r = phi.values()[j] / d;
            inf_ratio = inf_ratio.min(r);
            sup_ratio = sup_ratio.max(r);
        }
        c_lower = c_lower.min(inf_ratio / moment);
        c_upper = c_upper.max(sup_ratio / norm_q);
    }
    Ok(MorelConstants {
        c_lower,
        c_upper,
        q,
        provenance: Provenance::Estimated,
    })
}

/// Count violations of the two-sided comparison on a family, beyond a
/// `1e-9`-scaled slack. Zero on the held-out family is the validation gate.
pub fn validate_morel(op: &RadialOperator, consts: &MorelConstants, family: &[GridFn]) -> usize {
    let ball = *op.ball();
    let deltas = op.delta();
    let mut violations = 0;
    for h in family {
        let phi = op.apply(h);
        let moment = ball_delta_moment(&ball, h);
        let norm_q = match ball_lp_norm(&ball, h, consts.q) {
            Ok(n) => n,
            Err(_) => {
                violations += 1;
                continue;
            }
        };
        let slack = 1e-9 * (1.0 + phi.max_abs());
        for (j, &d) in deltas.iter().enumerate() {
            let lo = consts.c_lower * moment * d;
            let hi = consts.c_upper * norm_q * d;
            let v = phi.values()[j];
            if v < lo - slack || v > hi + slack {
                violations += 1;
                break;
            }
        }
    }
    violations
}

fn is_bounded_kind(f: &FunctionSpec) -> bool {
    match f {
        FunctionSpec::Power { s, t, .. } => *s >= 0.0 && *t >= 0.0,
        _ => true,
    }
}

/// Sufficient certificate on the ball (`alpha = gamma`, `gamma < 1/N`,
/// bounded `M`):
/// `||M||_inf < c_{Omega,gamma,N} (int K delta)^{1+gamma} / ||K||_p^gamma`,
/// with
/// `c_{Omega,gamma,N} = (c/C)^{1+gamma} gamma^gamma/(gamma+1)^{gamma+1}
///  (2/diam)^gamma / ||delta^{-gamma}||_{L^N}`
/// and its ball specialization
/// `>= (c/C)^{1+gamma} gamma^gamma/(gamma+1)^{gamma+1} (1/R)
///  ((1-gamma N)/omega)^{1/N}` recorded alongside.
pub fn suff_bola(sr: &SampledRadial, consts: &MorelConstants) -> Result<CertificateReport> {
    let ball = sr.spec.ball;
    let nn = ball.dim() as f64;
    if (sr.spec.alpha - sr.spec.gamma).abs() > 1e-12 {
        return Err(CoreError::HypothesisViolated(
            "the ball certificate requires alpha = gamma".into(),
        ));
    }
    let gamma = sr.spec.gamma;
    if !(gamma > 0.0 && gamma < 1.0 / nn) {
        return Err(CoreError::HypothesisViolated(format!(
            "the ball certificate requires gamma in (0, 1/N), got {gamma}"
        )));
    }
    if !is_bounded_kind(&sr.spec.m) {
        return Err(CoreError::HypothesisViolated(
            "the ball certificate requires bounded M (no negative power kinds)".into(),
        ));
    }
    let m_inf = sr.m.max_abs();
    let int_k_delta = ball_delta_moment(&ball, &sr.k);
    let k_lp = ball_lp_norm(&ball, &sr.k, sr.spec.p)?;
    let dnorm = ball_delta_negpow_norm(&ball, &sr.grid, gamma, nn)?;
    let ratio = consts.ratio();
    let gg = gamma.powf(gamma) / (gamma + 1.0).powf(gamma + 1.0);
    let c_generic = ratio.powf(1.0 + gamma) * gg * (2.0 / ball.diameter()).powf(gamma) / dnorm;
    let c_ball_lower = ratio.powf(1.0 + gamma) * gg / ball.radius()
        * ((1.0 - gamma * nn) / ball.omega()).powf(1.0 / nn);
    let rhs = c_generic * int_k_delta.powf(1.0 + gamma) / k_lp.powf(gamma);
    let mut constants = BTreeMap::new();
    constants.insert("c_omega_gamma_n".into(), c_generic);
    constants.insert("c_ball_lower_bound".into(), c_ball_lower);
    constants.insert("delta_negpow_norm_ln".into(), dnorm);
    constants.insert("int_k_delta".into(), int_k_delta);
    constants.insert("k_lp".into(), k_lp);
    constants.insert("c_lower".into(), consts.c_lower);
    constants.insert("c_upper".into(), consts.c_upper);
    let note = if consts.is_estimated() {
        "empirical certificate: comparison constants estimated from test loads"
    } else {
        ""
    };
    Ok(CertificateReport::build(
        CertificateId::Bola,
        m_inf,
        rhs,
        true,
        constants,
        note,
    ))
}

/// Strict necessary bound on the ball for `alpha <= gamma`:
/// `lambda < (diam/2 C (alpha+1) ||K||_p)^{(gamma-alpha)/(alpha+1)}
///  inf_Omega S(K)/S(M)`, the infimum including the boundary limit via the
/// derivative ratio at `r = R`.
pub fn lambda_necessary_upper_radial(
    sr: &SampledRadial,
    op: &RadialOperator,
    consts: &MorelConstants,
) -> Result<f64> {
    if sr.spec.alpha > sr.spec.gamma + 1e-12 {
        return Err(CoreError::HypothesisViolated(
            "the necessary bound requires alpha <= gamma".into(),
        ));
    }
    if sr.m.max_abs() == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ball = sr.spec.ball;
    let alpha = sr.spec.alpha;
    let gamma = sr.spec.gamma;
    let k_lp = ball_lp_norm(&ball, &sr.k, sr.spec.p)?;
    let sk = op.apply(&sr.k);
    let sm = op.apply(&sr.m);
    let mut inf_ratio = (-op.boundary_slope(&sr.k)) / (-op.boundary_slope(&sr.m));
    for j in 0..sk.len() {
        if sm.values()[j] > 0.0 {
            inf_ratio = inf_ratio.min(sk.values()[j] / sm.values()[j]);
        }
    }
    let base = 0.5 * ball.diameter() * consts.c_upper * (alpha + 1.0) * k_lp;
    Ok(base.powf((gamma - alpha) / (alpha + 1.0)) * inf_ratio)
}

/// Threshold lower bound on the ball for compactly supported `M` under
/// `||M||_p < (c/C) int K delta`:
/// `lambda_0 >= (dist(supp M, boundary))^gamma
///  (c int K delta - C ||M||_p)^gamma
///  / ((diam/2)(C ||K||_p - c int M delta))^{alpha(1+gamma)/(1+alpha)}`.
pub fn lambda0_lower_algo_radial(
    sr: &SampledRadial,
    consts: &MorelConstants,
) -> Result<crate::certificates::LambdaBound> {
    use crate::certificates::LambdaBound;
    let ball = sr.spec.ball;
    if sr.m.max_abs() == 0.0 {
        return Ok(LambdaBound {
            value: f64::INFINITY,
            degenerate_m_zero: true,
        });
    }
    let support = support_interval(&sr.spec.m, &sr.m).ok_or_else(|| {
        CoreError::HypothesisViolated("support of M could not be determined".into())
    })?;
    let dist = ball.radius() - support.1;
    if dist <= 1e-12 * ball.radius() {
        return Err(CoreError::HypothesisViolated(
            "support of M must be compactly contained in the ball".into(),
        ));
    }
    let int_k_delta = ball_delta_moment(&ball, &sr.k);
    let int_m_delta = ball_delta_moment(&ball, &sr.m);
    let m_lp = ball_lp_norm(&ball, &sr.m, sr.spec.p)?;
    let k_lp = ball_lp_norm(&ball, &sr.k, sr.spec.p)?;
    if !(m_lp < consts.ratio() * int_k_delta) {
        return Err(CoreError::HypothesisViolated(format!(
            "hypothesis ||M||_p < (c/C) int K delta fails: {} >= {}",
            m_lp,
            consts.ratio() * int_k_delta
        )));
    }
    let alpha = sr.spec.alpha;
    let gamma = sr.spec.gamma;
    let numer = dist * (consts.c_lower * int_k_delta - consts.c_upper * m_lp);
    let denom = 0.5 * ball.diameter() * (consts.c_upper * k_lp - consts.c_lower * int_m_delta);
    if denom <= 0.0 {
        return Err(CoreError::HypothesisViolated(
            "degenerate upper envelope in the radial threshold bound".into(),
        ));
    }
    Ok(LambdaBound {
        value: numer.powf(gamma) / denom.powf(alpha * (1.0 + gamma) / (1.0 + alpha)),
        degenerate_m_zero: false,
    })
}

/// Necessary screen for the sign-changing radial problem
/// `-Delta u = m u^{-gamma}`: any `W^{2,q}` solution forces `S(m) > 0`
/// on the open ball.
pub fn sign_changing_screen(op: &RadialOperator, m: &GridFn) -> bool {
    let sm = op.apply(m);
    sm.min_value() > 0.0 && -op.boundary_slope(m) > 0.0
}
