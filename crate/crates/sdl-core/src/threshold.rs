//! Empirical mapping of `Lambda = { lambda > 0 : the problem is solvable }`
//! and its endpoint `lambda_0 = sup Lambda`.
//!
//! The set is an interval `(0, lambda_0)` or `(0, lambda_0]`, which
//! justifies bisection on the membership test. Membership is probed with
//! the constructive solver; a converged positive solution certifies
//! `lambda in Lambda` numerically, while an iterate that loses positivity
//! (or a `lambda` at or above the necessary bound) is evidence of
//! nonexistence. An exhausted iteration budget is inconclusive and stops a
//! bisection with a diagnostic: no side is ever guessed.
//!
//! Whether `lambda_0` itself belongs to the set is not decidable
//! numerically; only a bracket is ever reported.

use serde::{Deserialize, Serialize};

use crate::certificates::{lambda0_lower_algo, lambda_necessary_upper, SampledProblem};
use crate::error::{CoreError, Result};
use crate::greens::SolutionOperator;
use crate::solver::{best_params, fixed_point_iterate, ProblemData, SolveOptions, SolveStatus};

/// Outcome of a membership probe at one `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistsStatus {
    ConvergedPositive,
    NoSolutionEvidence,
    Inconclusive,
}

impl ExistsStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExistsStatus::ConvergedPositive => "converged_positive",
            ExistsStatus::NoSolutionEvidence => "no_solution_evidence",
            ExistsStatus::Inconclusive => "inconclusive",
        }
    }
}

/// Why the probe returned what it returned. `ExcludedByNecessaryBound` is a
/// theorem-level exclusion; the iteration-based reasons are evidence from
/// one scheme, not proofs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeReason {
    SolverConverged,
    ExcludedByNecessaryBound,
    IterateLostPositivity,
    IterateLeftCone,
    IterationBudgetExhausted,
    ConvergedButClamped,
}

impl ProbeReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeReason::SolverConverged => "solver_converged",
            ProbeReason::ExcludedByNecessaryBound => "excluded_by_necessary_bound",
            ProbeReason::IterateLostPositivity => "iterate_lost_positivity",
            ProbeReason::IterateLeftCone => "iterate_left_cone",
            ProbeReason::IterationBudgetExhausted => "iteration_budget_exhausted",
            ProbeReason::ConvergedButClamped => "converged_but_clamped",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeOutcome {
    pub status: ExistsStatus,
    pub reason: ProbeReason,
    pub positivity_margin: f64,
    pub residual: f64,
}

/// Options for the threshold machinery. With `auto_relax` (default) the
/// membership probes run under-relaxed with `omega = 1/(1+gamma)`, which
/// damps the neutral oscillation of plain Picard near `gamma = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    pub solve: SolveOptions,
    pub auto_relax: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            auto_relax: true,
        }
    }
}

fn probe_options(sp: &SampledProblem, opts: &ThresholdOptions) -> SolveOptions {
    let mut s = opts.solve;
    if opts.auto_relax {
        s.relaxation = 1.0 / (1.0 + sp.spec.gamma);
    }
    s
}

/// Membership probe for `Lambda` at the given `lambda`.
pub fn exists_at(
    sp: &SampledProblem,
    op: &impl SolutionOperator,
    lambda: f64,
    opts: &ThresholdOptions,
) -> Result<ProbeOutcome> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CoreError::Threshold(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let sp = sp.with_lambda(lambda);
    // Theorem-level pre-screen: at or above the necessary bound there is
    // no W^{2,q} solution at all.
    if sp.spec.alpha <= sp.spec.gamma + 1e-12 {
        if let Ok(bound) = lambda_necessary_upper(&sp) {
            if lambda >= bound {
                return Ok(ProbeOutcome {
                    status: ExistsStatus::NoSolutionEvidence,
                    reason: ProbeReason::ExcludedByNecessaryBound,
                    positivity_margin: f64::NAN,
                    residual: f64::NAN,
                });
            }
        }
    }
    let params = best_params(&sp, op);
    let pd = ProblemData {
        alpha: sp.spec.alpha,
        gamma: sp.spec.gamma,
        lambda,
    };
    let solve_opts = probe_options(&sp, opts);
    let out = fixed_point_iterate(op, &sp.k, &sp.m, pd, &params, &solve_opts)?;
    let (status, reason) = match out.status {
        SolveStatus::Converged => {
            if out.cone_respected || params.variant.is_none() {
                (
                    ExistsStatus::ConvergedPositive,
                    ProbeReason::SolverConverged,
                )
            } else {
                // Existence claims never rest on clamped or cone-breaking
                // runs.
                (ExistsStatus::Inconclusive, ProbeReason::ConvergedButClamped)
            }
        }
        SolveStatus::Nonpositive => (
            ExistsStatus::NoSolutionEvidence,
            ProbeReason::IterateLostPositivity,
        ),
        SolveStatus::LeftCone => (
            ExistsStatus::NoSolutionEvidence,
            ProbeReason::IterateLeftCone,
        ),
        SolveStatus::MaxIter => (
            ExistsStatus::Inconclusive,
            ProbeReason::IterationBudgetExhausted,
        ),
    };
    Ok(ProbeOutcome {
        status,
        reason,
        positivity_margin: out.positivity_margin,
        residual: out.weak_residual,
    })
}

/// Result of a threshold search: the final bracket, the analytic bounds it
/// must sit between (`analytic_upper` may be infinite), every probe taken,
/// and whether the probes were order-consistent with `Lambda` being an
/// interval.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub lambda0_bracket: (f64, f64),
    pub analytic_lower: f64,
    pub analytic_upper: f64,
    pub samples: Vec<(f64, ExistsStatus)>,
    pub monotone_consistent: bool,
}

fn monotone_consistent(samples: &[(f64, ExistsStatus)]) -> bool {
    // No converged probe strictly above any nonexistence-evidence probe.
    let min_no = samples
        .iter()
        .filter(|(_, s)| *s == ExistsStatus::NoSolutionEvidence)
        .map(|(l, _)| *l)
        .fold(f64::INFINITY, f64::min);
    samples
        .iter()
        .filter(|(_, s)| *s == ExistsStatus::ConvergedPositive)
        .all(|(l, _)| *l <= min_no)
}

/// Bisect the existence threshold inside `bracket`. The lower endpoint must
/// probe as solvable and the upper as not; `rel_tol` is the target bracket
/// width relative to the initial width.
pub fn estimate_lambda0(
    sp: &SampledProblem,
    op: &impl SolutionOperator,
    bracket: (f64, f64),
    rel_tol: f64,
    opts: &ThresholdOptions,
) -> Result<ThresholdResult> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(CoreError::Threshold(format!(
            "bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(CoreError::Threshold(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    let mut samples = Vec::new();
    let lo_probe = exists_at(sp, op, lo, opts)?;
    samples.push((lo, lo_probe.status));
    if lo_probe.status != ExistsStatus::ConvergedPositive {
        return Err(CoreError::Threshold(format!(
            "lower endpoint {lo} is not solvable ({}: {})",
            lo_probe.status.as_str(),
            lo_probe.reason.as_str()
        )));
    }
    let hi_probe = exists_at(sp, op, hi, opts)?;
    samples.push((hi, hi_probe.status));
    if hi_probe.status != ExistsStatus::NoSolutionEvidence {
        return Err(CoreError::Threshold(format!(
            "upper endpoint {hi} not excluding ({}: {})",
            hi_probe.status.as_str(),
            hi_probe.reason.as_str()
        )));
    }
    let width0 = hi - lo;
    while hi - lo > rel_tol * width0 {
        let mid = 0.5 * (lo + hi);
        let probe = exists_at(sp, op, mid, opts)?;
        samples.push((mid, probe.status));
        match probe.status {
            ExistsStatus::ConvergedPositive => lo = mid,
            ExistsStatus::NoSolutionEvidence => hi = mid,
            ExistsStatus::Inconclusive => {
                return Err(CoreError::Threshold(format!(
                    "inconclusive probe at lambda = {mid} ({}); \
                     bisection stopped rather than guessing a side",
                    probe.reason.as_str()
                )));
            }
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let analytic_lower = match lambda0_lower_algo(sp) {
        Ok(b) if !b.degenerate_m_zero => b.value,
        _ => 0.0,
    };
    let analytic_upper = if sp.spec.alpha <= sp.spec.gamma + 1e-12 {
        lambda_necessary_upper(sp).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    let monotone = monotone_consistent(&samples);
    Ok(ThresholdResult {
        lambda0_bracket: (lo, hi),
        analytic_lower,
        analytic_upper,
        samples,
        monotone_consistent: monotone,
    })
}

/// Sweep axis: the spectral parameter or the singularity exponent (the
/// latter moves `alpha = gamma` together, matching the homogeneous theory).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    Gamma,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub value: f64,
    pub status: ExistsStatus,
    pub reason: ProbeReason,
    pub positivity_margin: f64,
    pub residual: f64,
}

/// Probe a sorted list of positive parameter values, one row per value.
pub fn sweep(
    sp: &SampledProblem,
    op: &impl SolutionOperator,
    axis: SweepAxis,
    values: &[f64],
    opts: &ThresholdOptions,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CoreError::Threshold("sweep values must be nonempty".into()));
    }
    for w in values.windows(2) {
        if w[1] <= w[0] {
            return Err(CoreError::Threshold(
                "sweep values must be strictly increasing".into(),
            ));
        }
    }
    if values[0] <= 0.0 {
        return Err(CoreError::Threshold("sweep values must be positive".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let probe = match axis {
            SweepAxis::Lambda => exists_at(sp, op, v, opts)?,
            SweepAxis::Gamma => {
                let spg = sp.with_gamma_eq_alpha(v);
                exists_at(&spg, op, spg.spec.lambda, opts)?
            }
        };
        rows.push(SweepRow {
            value: v,
            status: probe.status,
            reason: probe.reason,
            positivity_margin: probe.positivity_margin,
            residual: probe.residual,
        });
    }
    Ok(rows)
}
