//! Evaluable existence and nonexistence certificates on intervals.
//!
//! Every analytic condition is turned into a report carrying both sides of
//! the inequality, all intermediate constants, and whether the comparison
//! (strict or not, recorded per certificate) holds:
//!
//! - `M2`: for `alpha = gamma`, `gamma in (0, (p-1)/p)`,
//!   `max(||M_a||_p, ||M_b||_p) <= c_{gamma,p,a,b} (int K delta)^{1+gamma} / (int K)^gamma`
//!   guarantees a solution for every `lambda <= 1` (non-strict).
//! - `HIP`: `max(int M_a, int M_b) < int K delta` guarantees a solution for
//!   all small enough `gamma` and every `lambda <= 1` (strict).
//! - `ALGO_LOWER`: for `M` compactly supported and `HIP`, an explicit
//!   positive lower bound for the existence threshold `lambda_0`.
//! - `NECESSARY_UPPER`: for `alpha <= gamma`, a strict upper bound every
//!   solvable `lambda` must satisfy.
//! - `SIGN_CHANGING_*`: the specialization `K = m^+`, `M = m^-`,
//!   `alpha = gamma`, `lambda = 1` for the single-equation problem
//!   `-u'' = m(x) u^{-gamma}` with sign-changing `m`.
//!
//! Here `h_a(x) = (x-a) h(x)`, `h_b(x) = (b-x) h(x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::Domain1D;
use crate::error::{CoreError, Result};
use crate::funcspec::{support_interval, FunctionSpec};
use crate::grid::GradedGrid;
use crate::gridfn::GridFn;
use crate::quad::{conjugate_exponent, delta_negpow_norm_closed_form, integrate, lp_norm, Weight};

/// Problem data for `-u'' = K u^{-alpha} - lambda M u^{-gamma}` on an
/// interval, with `p` the integrability exponent of `M` (`>= 2` or infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub domain: Domain1D,
    pub k: FunctionSpec,
    pub m: FunctionSpec,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub p: f64,
}

impl ProblemSpec {
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
        if !(self.p >= 2.0) {
            return Err(CoreError::InvalidProblem(format!(
                "integrability exponent p must be >= 2 or infinite, got {}",
                self.p
            )));
        }
        self.k.validate(&self.domain)?;
        self.m.validate(&self.domain)?;
        Ok(())
    }

    /// Sample onto a grid, checking the sign constraints on `K` and `M`.
    pub fn sample(&self, grid: &Arc<GradedGrid>) -> Result<SampledProblem> {
        self.validate()?;
        if grid.domain() != &self.domain {
            return Err(CoreError::InvalidProblem(
                "grid and problem domains differ".into(),
            ));
        }
        let k = sample_nonnegative(&self.k, grid, "K")?;
        let m = sample_nonnegative(&self.m, grid, "M")?;
        if integrate(&k, Weight::One)? <= 0.0 {
            return Err(CoreError::InvalidProblem(
                "K must have positive integral".into(),
            ));
        }
        Ok(SampledProblem {
            spec: self.clone(),
            grid: grid.clone(),
            k,
            m,
        })
    }
}

fn sample_nonnegative(f: &FunctionSpec, grid: &Arc<GradedGrid>, name: &str) -> Result<GridFn> {
    let h = f.sample(grid)?;
    let scale = h.max_abs();
    if h.min_value() < -1e-12 * (1.0 + scale) {
        return Err(CoreError::InvalidProblem(format!(
            "{name} must be nonnegative"
        )));
    }
    Ok(h.map(|v| v.max(0.0)))
}

/// A problem together with its coefficient samples on a fixed grid.
#[derive(Debug, Clone)]
pub struct SampledProblem {
    pub spec: ProblemSpec,
    pub grid: Arc<GradedGrid>,
    pub k: GridFn,
    pub m: GridFn,
}

impl SampledProblem {
    pub fn with_lambda(&self, lambda: f64) -> SampledProblem {
        let mut out = self.clone();
        out.spec.lambda = lambda;
        out
    }

    pub fn with_gamma_eq_alpha(&self, gamma: f64) -> SampledProblem {
        let mut out = self.clone();
        out.spec.gamma = gamma;
        out.spec.alpha = gamma;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateId {
    M2,
    Hip,
    AlgoLower,
    NecessaryUpper,
    SignChangingI,
    SignChangingIi,
    SignChangingNec,
    Bola,
    AlgoLowerRadial,
    NecessaryUpperRadial,
}

impl CertificateId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateId::M2 => "M2",
            CertificateId::Hip => "HIP",
            CertificateId::AlgoLower => "ALGO_LOWER",
            CertificateId::NecessaryUpper => "NECESSARY_UPPER",
            CertificateId::SignChangingI => "SIGN_CHANGING_I",
            CertificateId::SignChangingIi => "SIGN_CHANGING_II",
            CertificateId::SignChangingNec => "SIGN_CHANGING_NEC",
            CertificateId::Bola => "BOLA",
            CertificateId::AlgoLowerRadial => "ALGO_LOWER_RADIAL",
            CertificateId::NecessaryUpperRadial => "NECESSARY_UPPER_RADIAL",
        }
    }
}

/// One analytic inequality, evaluated.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub id: CertificateId,
    pub lhs: f64,
    pub rhs: f64,
    /// Whether the comparison is strict (`lhs < rhs`) or not (`lhs <= rhs`).
    pub strict: bool,
    pub holds: bool,
    /// `rhs - lhs`; positive margins are comfortable passes.
    pub margin: f64,
    pub constants: BTreeMap<String, f64>,
    pub note: String,
}

impl CertificateReport {
    pub fn build(
        id: CertificateId,
        lhs: f64,
        rhs: f64,
        strict: bool,
        constants: BTreeMap<String, f64>,
        note: impl Into<String>,
    ) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Self {
            id,
            lhs,
            rhs,
            strict,
            holds,
            margin: rhs - lhs,
            constants,
            note: note.into(),
        }
    }

    pub fn not_applicable(id: CertificateId, msg: &str) -> Self {
        Self {
            id,
            lhs: f64::NAN,
            rhs: f64::NAN,
            strict: false,
            holds: false,
            margin: f64::NAN,
            constants: BTreeMap::new(),
            note: format!("not applicable: {msg}"),
        }
    }
}

/// The constant
/// `c_{gamma,p,a,b} = gamma^gamma/(gamma+1)^{gamma+1} *
///  (1 - gamma p')^{1/p'} / (b-a)^{gamma + 1/p'}`, defined for
/// `gamma in (0, (p-1)/p)`.
pub fn c_gamma_const(gamma: f64, p: f64, domain: &Domain1D) -> Result<f64> {
    let pp = conjugate_exponent(p);
    if !(gamma > 0.0) || gamma * pp >= 1.0 {
        return Err(CoreError::HypothesisViolated(format!(
            "c_gamma requires gamma in (0, (p-1)/p); gamma = {gamma}, p = {p}"
        )));
    }
    let len = domain.length();
    Ok(
        gamma.powf(gamma) / (gamma + 1.0).powf(gamma + 1.0) * (1.0 - gamma * pp).powf(1.0 / pp)
            / len.powf(gamma + 1.0 / pp),
    )
}

/// The moments of the data that every interval certificate consumes.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub int_k: f64,
    pub int_k_delta: f64,
    pub int_k_a: f64,
    pub int_k_b: f64,
    pub int_m: f64,
    pub int_m_delta: f64,
    pub int_m_a: f64,
    pub int_m_b: f64,
}

pub fn moments(k: &GridFn, m: &GridFn) -> Result<Moments> {
    Ok(Moments {
        int_k: integrate(k, Weight::One)?,
        int_k_delta: integrate(k, Weight::Delta)?,
        int_k_a: integrate(k, Weight::Left)?,
        int_k_b: integrate(k, Weight::Right)?,
        int_m: integrate(m, Weight::One)?,
        int_m_delta: integrate(m, Weight::Delta)?,
        int_m_a: integrate(m, Weight::Left)?,
        int_m_b: integrate(m, Weight::Right)?,
    })
}

/// `max(||h_a||_p, ||h_b||_p)` from the endpoint-weighted samples.
pub fn weighted_norm_max(m: &GridFn, p: f64) -> Result<f64> {
    let grid = m.grid();
    let off_a = grid.point_offsets_a();
    let off_b = grid.point_offsets_b();
    let m_a = GridFn::new(
        grid.clone(),
        m.values().iter().zip(off_a).map(|(&v, &o)| v * o).collect(),
    );
    let m_b = GridFn::new(
        grid.clone(),
        m.values().iter().zip(off_b).map(|(&v, &o)| v * o).collect(),
    );
    Ok(lp_norm(&m_a, p)?.max(lp_norm(&m_b, p)?))
}

/// Sufficient certificate `M2` on sampled data; exposes the homogeneity
/// factor `tau = 2 / ((b-a) int K)` consumed by the constructive solver.
pub fn suff_m2_data(
    k: &GridFn,
    m: &GridFn,
    gamma: f64,
    p: f64,
    domain: &Domain1D,
) -> Result<CertificateReport> {
    let c = c_gamma_const(gamma, p, domain)?;
    let mom = moments(k, m)?;
    if mom.int_k <= 0.0 {
        return Err(CoreError::InvalidProblem(
            "K must not vanish identically".into(),
        ));
    }
    let m_p = weighted_norm_max(m, p)?;
    let rhs = c * mom.int_k_delta.powf(1.0 + gamma) / mom.int_k.powf(gamma);
    let tau = 2.0 / (domain.length() * mom.int_k);
    let pp = conjugate_exponent(p);
    let mut constants = BTreeMap::new();
    constants.insert("c_gamma_p".into(), c);
    constants.insert("int_k".into(), mom.int_k);
    constants.insert("int_k_delta".into(), mom.int_k_delta);
    constants.insert("m_p".into(), m_p);
    constants.insert("tau".into(), tau);
    constants.insert(
        "delta_negpow_norm".into(),
        delta_negpow_norm_closed_form(domain, gamma, pp)?,
    );
    Ok(CertificateReport::build(
        CertificateId::M2,
        m_p,
        rhs,
        false,
        constants,
        "",
    ))
}

pub fn suff_m2(sp: &SampledProblem) -> Result<CertificateReport> {
    if (sp.spec.alpha - sp.spec.gamma).abs() > 1e-12 {
        return Err(CoreError::HypothesisViolated(
            "M2 applies to the homogeneous case alpha = gamma".into(),
        ));
    }
    suff_m2_data(&sp.k, &sp.m, sp.spec.gamma, sp.spec.p, &sp.spec.domain)
}

/// Sufficient certificate `HIP` (strict); total on nonnegative data.
pub fn suff_hip_data(k: &GridFn, m: &GridFn) -> CertificateReport {
    let mom = moments(k, m).expect("polynomial weights are total");
    let lhs = mom.int_m_a.max(mom.int_m_b);
    let mut constants = BTreeMap::new();
    constants.insert("int_m_a".into(), mom.int_m_a);
    constants.insert("int_m_b".into(), mom.int_m_b);
    constants.insert("int_k_delta".into(), mom.int_k_delta);
    CertificateReport::build(
        CertificateId::Hip,
        lhs,
        mom.int_k_delta,
        true,
        constants,
        "",
    )
}

pub fn suff_hip(sp: &SampledProblem) -> CertificateReport {
    suff_hip_data(&sp.k, &sp.m)
}

/// A lower bound for the existence threshold, with a degeneracy flag for
/// `M = 0` (where the bound is `+infinity`).
#[derive(Debug, Clone, Copy)]
pub struct LambdaBound {
    pub value: f64,
    pub degenerate_m_zero: bool,
}

/// Threshold lower bound for compactly supported `M` under `HIP`:
/// `lambda_0 >= (dist(supp M, boundary)/(b-a))^gamma
///   (int K delta - max(int M_a, int M_b))^gamma
///   / ((1/2)(max(int K_a, int K_b) - int M delta))^{alpha(1+gamma)/(1+alpha)}`.
pub fn lambda0_lower_algo(sp: &SampledProblem) -> Result<LambdaBound> {
    let mom = moments(&sp.k, &sp.m)?;
    if sp.m.max_abs() == 0.0 || mom.int_m <= 0.0 {
        return Ok(LambdaBound {
            value: f64::INFINITY,
            degenerate_m_zero: true,
        });
    }
    let dom = &sp.spec.domain;
    let support = support_interval(&sp.spec.m, &sp.m).ok_or_else(|| {
        CoreError::HypothesisViolated("support of M could not be determined".into())
    })?;
    let dist = (support.0 - dom.a()).min(dom.b() - support.1);
    if dist <= 1e-12 * dom.length() {
        return Err(CoreError::HypothesisViolated(
            "support of M must be compactly contained in the interval".into(),
        ));
    }
    let hip = suff_hip(sp);
    if !hip.holds {
        return Err(CoreError::HypothesisViolated(
            "HIP fails: max(int M_a, int M_b) >= int K delta".into(),
        ));
    }
    let gamma = sp.spec.gamma;
    let alpha = sp.spec.alpha;
    let numer = (dist / dom.length()) * (mom.int_k_delta - mom.int_m_a.max(mom.int_m_b));
    let mu_base = 0.5 * (mom.int_k_a.max(mom.int_k_b) - mom.int_m_delta);
    if mu_base <= 0.0 {
        return Err(CoreError::HypothesisViolated(
            "degenerate upper envelope in the threshold bound".into(),
        ));
    }
    let value = numer.powf(gamma) / mu_base.powf(alpha * (1.0 + gamma) / (1.0 + alpha));
    Ok(LambdaBound {
        value,
        degenerate_m_zero: false,
    })
}

/// Strict necessary upper bound for solvable `lambda` when `alpha <= gamma`:
/// `lambda < ((alpha+1)/2 max(int K_a, int K_b))^{(gamma-alpha)/(alpha+1)}
///   int K delta / int M delta`.
pub fn lambda_necessary_upper(sp: &SampledProblem) -> Result<f64> {
    if sp.spec.alpha > sp.spec.gamma + 1e-12 {
        return Err(CoreError::HypothesisViolated(
            "the necessary bound requires alpha <= gamma".into(),
        ));
    }
    let mom = moments(&sp.k, &sp.m)?;
    if mom.int_m_delta <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let alpha = sp.spec.alpha;
    let gamma = sp.spec.gamma;
    let base = 0.5 * (alpha + 1.0) * mom.int_k_a.max(mom.int_k_b);
    Ok(base.powf((gamma - alpha) / (alpha + 1.0)) * mom.int_k_delta / mom.int_m_delta)
}

/// The three sign-changing reports for `-u'' = m u^{-gamma}`:
/// `M2` and `HIP` applied to `(m^+, m^-)`, plus the necessary comparison
/// `int m^- delta < int m^+ delta`.
pub fn certify_sign_changing(m: &GridFn, gamma: f64, p: f64) -> Result<Vec<CertificateReport>> {
    if m.max_abs() == 0.0 {
        return Err(CoreError::InvalidProblem(
            "sign-changing certificates require m not identically zero".into(),
        ));
    }
    let domain = *m.grid().domain();
    let plus = m.positive_part();
    let minus = m.negative_part();
    let first = if plus.max_abs() == 0.0 {
        // Nonpositive m: the sufficient condition degenerates to
        // comparing against zero and cannot hold.
        CertificateReport::build(
            CertificateId::SignChangingI,
            weighted_norm_max(&minus, p)?,
            0.0,
            false,
            BTreeMap::new(),
            "m^+ vanishes identically",
        )
    } else {
        match suff_m2_data(&plus, &minus, gamma, p, &domain) {
            Ok(mut rep) => {
                rep.id = CertificateId::SignChangingI;
                rep
            }
            Err(CoreError::HypothesisViolated(msg)) => {
                CertificateReport::not_applicable(CertificateId::SignChangingI, &msg)
            }
            Err(e) => return Err(e),
        }
    };
    let mut second = suff_hip_data(&plus, &minus);
    second.id = CertificateId::SignChangingIi;
    let plus_delta = integrate(&plus, Weight::Delta)?;
    let minus_delta = integrate(&minus, Weight::Delta)?;
    let mut constants = BTreeMap::new();
    constants.insert("int_m_plus_delta".into(), plus_delta);
    constants.insert("int_m_minus_delta".into(), minus_delta);
    let nec = CertificateReport::build(
        CertificateId::SignChangingNec,
        minus_delta,
        plus_delta,
        true,
        constants,
        "necessary for any solution in W^{2,q}",
    );
    Ok(vec![first, second, nec])
}

/// All certificates applicable to an interval problem, in a fixed order,
/// wrapping the threshold bounds as reports against the problem's `lambda`.
pub fn certify_all(sp: &SampledProblem) -> Result<Vec<CertificateReport>> {
    let mut out = Vec::new();
    if (sp.spec.alpha - sp.spec.gamma).abs() <= 1e-12 {
        match suff_m2(sp) {
            Ok(rep) => out.push(rep),
            Err(CoreError::HypothesisViolated(msg)) => {
                out.push(CertificateReport::not_applicable(CertificateId::M2, &msg))
            }
            Err(e) => return Err(e),
        }
    }
    out.push(suff_hip(sp));
    match lambda0_lower_algo(sp) {
        Ok(bound) => {
            let mut constants = BTreeMap::new();
            constants.insert("lambda0_lower".into(), bound.value);
            out.push(CertificateReport::build(
                CertificateId::AlgoLower,
                sp.spec.lambda,
                bound.value,
                false,
                constants,
                if bound.degenerate_m_zero {
                    "M vanishes: no negative term, bound degenerates to +inf"
                } else {
                    "lambda <= bound guarantees a solution"
                },
            ));
        }
        Err(CoreError::HypothesisViolated(_)) => {}
        Err(e) => return Err(e),
    }
    if sp.spec.alpha <= sp.spec.gamma + 1e-12 {
        let bound = lambda_necessary_upper(sp)?;
        let mut constants = BTreeMap::new();
        constants.insert("lambda_upper".into(), bound);
        out.push(CertificateReport::build(
            CertificateId::NecessaryUpper,
            sp.spec.lambda,
            bound,
            true,
            constants,
            "lambda >= bound excludes W^{2,q} solutions",
        ));
    }
    Ok(out)
}
