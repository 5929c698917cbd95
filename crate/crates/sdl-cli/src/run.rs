//! Command dispatch: build the grid and operators, run the requested
//! computation, and assemble the deterministic report plus any CSV tables.
//!
//! Exit codes: 0 on full success, 2 when the run computed its result but an
//! applicable certificate failed, 3 on numerical failure (solver did not
//! converge, invalid threshold bracket, inconclusive bisection) or any
//! input error.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};

use sdl_core::certificates::{
    certify_all, certify_sign_changing, CertificateId, CertificateReport, SampledProblem,
};
use sdl_core::domain::BallDomain;
use sdl_core::greens::{GreenOperator, SolutionOperator};
use sdl_core::grid::{build_grid, default_grading, GradedGrid};
use sdl_core::gridfn::GridFn;
use sdl_core::radial::{
    ball_delta_moment, estimate_morel_constants, held_out_family, lambda0_lower_algo_radial,
    lambda_necessary_upper_radial, sign_changing_screen, suff_bola, validate_morel, MorelConstants,
    RadialOperator, SampledRadial,
};
use sdl_core::solver::{
    best_params_data, fixed_point_iterate, ConstructiveParams, ProblemData, SolveOptions,
    SolveOutcome, SolveStatus,
};
use sdl_core::threshold::{estimate_lambda0, sweep, SweepAxis, ThresholdOptions};

use crate::config::{Command, Grading, RunConfig};
use crate::report::{certificate_json, echo, Csv, CsvCell, Json};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a run produces, before touching the filesystem.
pub struct RunOutput {
    pub report: Json,
    /// `(file name, content)` pairs emitted beside the report.
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
}

impl RunOutput {
    pub fn report_text(&self) -> String {
        self.report.to_text()
    }
}

/// Write the report and its side files under `dir`; returns the paths.
pub fn emit(out: &RunOutput, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut written = Vec::new();
    let report_path = dir.join("report.json");
    std::fs::write(&report_path, out.report_text())
        .with_context(|| format!("writing {}", report_path.display()))?;
    written.push(report_path);
    for (name, content) in &out.files {
        let path = dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.numerics.tol,
        max_iter: cfg.numerics.max_iter,
        relaxation: cfg.numerics.relaxation.unwrap_or(1.0),
        residual_tol: cfg.numerics.residual_tol,
    }
}

fn threshold_options(cfg: &RunConfig) -> ThresholdOptions {
    ThresholdOptions {
        solve: solve_options(cfg),
        auto_relax: cfg.numerics.relaxation.is_none(),
    }
}

fn applicable_failure(reps: &[CertificateReport]) -> bool {
    reps.iter()
        .any(|r| !r.holds && !r.note.starts_with("not applicable"))
}

fn report_skeleton(cfg: &RunConfig, grid: &Arc<GradedGrid>) -> Json {
    let mut j = Json::obj();
    j.push("version", Json::Str(VERSION.into()));
    j.push(
        "command",
        Json::Str(cfg.command.expect("command resolved").as_str().into()),
    );
    let mut grid_j = Json::obj();
    grid_j.push("n", Json::Int(grid.n_cells() as i64));
    grid_j.push("grading", Json::Num(grid.grading()));
    grid_j.push("points_per_cell", Json::Int(grid.order() as i64));
    j.push("grid", grid_j);
    j.push("config", echo(cfg));
    j
}

fn certificates_json(reps: &[CertificateReport]) -> Json {
    Json::Arr(reps.iter().map(certificate_json).collect())
}

fn solve_json(out: &SolveOutcome, params: &ConstructiveParams) -> Json {
    let mut j = Json::obj();
    j.push("status", Json::Str(out.status.as_str().into()));
    j.push("iterations", Json::Int(out.iterations as i64));
    j.push("sup_norm_step", Json::Num(out.sup_norm_step));
    j.push("weak_residual", Json::Num(out.weak_residual));
    j.push("positivity_margin", Json::Num(out.positivity_margin));
    j.push("upper_margin", Json::Num(out.upper_margin));
    j.push("cone_respected", Json::Bool(out.cone_respected));
    let mut cone = Json::obj();
    cone.push(
        "variant",
        match params.variant {
            Some(sdl_core::solver::ConeVariant::M2) => Json::Str("M2".into()),
            Some(sdl_core::solver::ConeVariant::Hip) => Json::Str("HIP".into()),
            None => Json::Null,
        },
    );
    cone.push("tau", Json::Num(params.tau));
    cone.push("beta", Json::Num(params.beta));
    cone.push("r", Json::Num(params.r));
    cone.push("d_coefficient", Json::Num(params.d_coefficient));
    cone.push("m_p", Json::Num(params.m_p));
    j.push("cone", cone);
    j
}

/// Interval problem data with the effective `(K, M)` pair: either the
/// configured coefficients or the parts of a sign-changing `m`.
struct IntervalData {
    grid: Arc<GradedGrid>,
    k: GridFn,
    m: GridFn,
    pd: ProblemData,
    p: f64,
    sampled: Option<SampledProblem>,
    /// The raw sign-changing sample, when the problem came in as `m_sign`.
    m_raw: Option<GridFn>,
}

fn interval_data(cfg: &RunConfig) -> anyhow::Result<IntervalData> {
    let domain = cfg
        .interval()
        .ok_or_else(|| anyhow!("this command requires an interval domain"))?;
    let grid =
        build_grid(domain, cfg.numerics.n, cfg.grading_value()).map_err(|e| anyhow!("{e}"))?;
    if let Some(msign) = &cfg.problem.m_sign {
        let m_raw = msign.sample(&grid).map_err(|e| anyhow!("{e}"))?;
        if m_raw.max_abs() == 0.0 {
            bail!("sign-changing data m must not vanish identically");
        }
        let gamma = cfg.problem.gamma;
        Ok(IntervalData {
            grid: grid.clone(),
            k: m_raw.positive_part(),
            m: m_raw.negative_part(),
            pd: ProblemData {
                alpha: gamma,
                gamma,
                lambda: 1.0,
            },
            p: cfg.problem.p.0,
            sampled: None,
            m_raw: Some(m_raw),
        })
    } else {
        let spec = cfg
            .problem_spec()
            .ok_or_else(|| anyhow!("interval problems need K and M"))?;
        let sp = spec.sample(&grid).map_err(|e| anyhow!("{e}"))?;
        Ok(IntervalData {
            grid: grid.clone(),
            k: sp.k.clone(),
            m: sp.m.clone(),
            pd: ProblemData {
                alpha: sp.spec.alpha,
                gamma: sp.spec.gamma,
                lambda: sp.spec.lambda,
            },
            p: sp.spec.p,
            sampled: Some(sp),
            m_raw: None,
        })
    }
}

fn interval_certificates(data: &IntervalData) -> anyhow::Result<Vec<CertificateReport>> {
    if let Some(m_raw) = &data.m_raw {
        certify_sign_changing(m_raw, data.pd.gamma, data.p).map_err(|e| anyhow!("{e}"))
    } else {
        certify_all(data.sampled.as_ref().expect("sampled problem")).map_err(|e| anyhow!("{e}"))
    }
}

fn run_certify(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let data = interval_data(cfg)?;
    let reps = interval_certificates(&data)?;
    let mut report = report_skeleton(cfg, &data.grid);
    report.push("certificates", certificates_json(&reps));
    let exit_code = if applicable_failure(&reps) { 2 } else { 0 };
    Ok(RunOutput {
        report,
        files: Vec::new(),
        exit_code,
    })
}

fn solution_csv<O: SolutionOperator>(op: &O, data: &IntervalData, out: &SolveOutcome) -> String {
    // Pointwise residual: the fixed-point defect u - S(f(u)).
    let defect = if out.u.min_value() > 0.0 {
        let f_vals: Vec<f64> = (0..out.u.len())
            .map(|j| {
                let uv = out.u.values()[j];
                data.k.values()[j] * uv.powf(-data.pd.alpha)
                    - data.pd.lambda * data.m.values()[j] * uv.powf(-data.pd.gamma)
            })
            .collect();
        let f = GridFn::new(data.grid.clone(), f_vals);
        out.u.sub(&op.apply(&f))
    } else {
        GridFn::new(data.grid.clone(), vec![f64::NAN; out.u.len()])
    };
    let mut csv = Csv::new("x,u,delta,pointwise_residual");
    for j in 0..out.u.len() {
        csv.row(&[
            CsvCell::Num(data.grid.points()[j]),
            CsvCell::Num(out.u.values()[j]),
            CsvCell::Num(op.delta()[j]),
            CsvCell::Num(defect.values()[j]),
        ]);
    }
    csv.to_text()
}

fn run_solve(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let data = interval_data(cfg)?;
    let op = GreenOperator::new(&data.grid);
    let params = best_params_data(
        &op,
        &data.k,
        &data.m,
        data.pd.alpha,
        data.pd.gamma,
        data.pd.lambda,
        data.p,
    );
    let out = fixed_point_iterate(&op, &data.k, &data.m, data.pd, &params, &solve_options(cfg))
        .map_err(|e| anyhow!("{e}"))?;
    let reps = interval_certificates(&data)?;
    let mut report = report_skeleton(cfg, &data.grid);
    report.push("certificates", certificates_json(&reps));
    report.push("solve", solve_json(&out, &params));
    let files = vec![("solution.csv".to_string(), solution_csv(&op, &data, &out))];
    report.push(
        "outputs",
        Json::Arr(vec![
            Json::Str("report.json".into()),
            Json::Str("solution.csv".into()),
        ]),
    );
    let exit_code = if out.status != SolveStatus::Converged {
        3
    } else if applicable_failure(&reps) {
        2
    } else {
        0
    };
    Ok(RunOutput {
        report,
        files,
        exit_code,
    })
}

fn run_threshold(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let data = interval_data(cfg)?;
    let sp = data
        .sampled
        .as_ref()
        .ok_or_else(|| anyhow!("threshold requires K/M data"))?;
    let op = GreenOperator::new(&data.grid);
    let tcfg = cfg.threshold.as_ref().expect("validated");
    let res = estimate_lambda0(sp, &op, tcfg.bracket, tcfg.rel_tol, &threshold_options(cfg))
        .map_err(|e| anyhow!("{e}"))?;
    let mut report = report_skeleton(cfg, &data.grid);
    let mut t = Json::obj();
    t.push(
        "lambda0_bracket",
        Json::Arr(vec![
            Json::Num(res.lambda0_bracket.0),
            Json::Num(res.lambda0_bracket.1),
        ]),
    );
    t.push("analytic_lower", Json::Num(res.analytic_lower));
    t.push("analytic_upper", Json::Num(res.analytic_upper));
    t.push("monotone_consistent", Json::Bool(res.monotone_consistent));
    t.push(
        "samples",
        Json::Arr(
            res.samples
                .iter()
                .map(|(l, s)| Json::Arr(vec![Json::Num(*l), Json::Str(s.as_str().into())]))
                .collect(),
        ),
    );
    report.push("threshold", t);
    Ok(RunOutput {
        report,
        files: Vec::new(),
        exit_code: 0,
    })
}

fn run_sweep(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let data = interval_data(cfg)?;
    let sp = data
        .sampled
        .as_ref()
        .ok_or_else(|| anyhow!("sweep requires K/M data"))?;
    let op = GreenOperator::new(&data.grid);
    let scfg = cfg.sweep.as_ref().expect("validated");
    let rows = sweep(sp, &op, scfg.axis, &scfg.values, &threshold_options(cfg))
        .map_err(|e| anyhow!("{e}"))?;
    let mut csv = Csv::new("value,status,positivity_margin,residual");
    for r in &rows {
        csv.row(&[
            CsvCell::Num(r.value),
            CsvCell::Str(r.status.as_str()),
            CsvCell::Num(r.positivity_margin),
            CsvCell::Num(r.residual),
        ]);
    }
    let mut report = report_skeleton(cfg, &data.grid);
    let mut s = Json::obj();
    s.push(
        "axis",
        Json::Str(match scfg.axis {
            SweepAxis::Lambda => "lambda".into(),
            SweepAxis::Gamma => "gamma".into(),
        }),
    );
    s.push("rows", Json::Int(rows.len() as i64));
    s.push(
        "statuses",
        Json::Arr(
            rows.iter()
                .map(|r| Json::Str(r.status.as_str().into()))
                .collect(),
        ),
    );
    report.push("sweep", s);
    report.push(
        "outputs",
        Json::Arr(vec![
            Json::Str("report.json".into()),
            Json::Str("sweep.csv".into()),
        ]),
    );
    Ok(RunOutput {
        report,
        files: vec![("sweep.csv".to_string(), csv.to_text())],
        exit_code: 0,
    })
}

struct RadialData {
    grid: Arc<GradedGrid>,
    ball: BallDomain,
    op: RadialOperator,
    consts: MorelConstants,
    held_out_violations: usize,
    sampled: Option<SampledRadial>,
    m_raw: Option<GridFn>,
}

fn radial_data(cfg: &RunConfig) -> anyhow::Result<RadialData> {
    let ball = cfg
        .ball()
        .ok_or_else(|| anyhow!("radial commands require a ball domain"))?;
    let grading = match cfg.numerics.grading {
        Grading::Value(g) => g,
        // The singular boundary weight on balls is (R-r)^{-gamma N}.
        Grading::Auto => default_grading(cfg.problem.gamma * ball.dim() as f64),
    };
    let grid =
        build_grid(ball.radial_interval(), cfg.numerics.n, grading).map_err(|e| anyhow!("{e}"))?;
    let op = RadialOperator::new(&grid, &ball).map_err(|e| anyhow!("{e}"))?;
    let q_default = ball.dim() as f64 + 1.0;
    let (consts, held_out_violations) = match &cfg.radial {
        Some(mc) if mc.c_lower.is_some() => {
            let c = MorelConstants::user_supplied(
                mc.c_lower.unwrap(),
                mc.c_upper.unwrap(),
                mc.q.unwrap_or(q_default),
            )
            .map_err(|e| anyhow!("{e}"))?;
            let fam = held_out_family(&ball, &grid);
            let v = validate_morel(&op, &c, &fam);
            (c, v)
        }
        other => {
            let q = other.as_ref().and_then(|mc| mc.q).unwrap_or(q_default);
            let c = estimate_morel_constants(&op, q).map_err(|e| anyhow!("{e}"))?;
            let fam = held_out_family(&ball, &grid);
            let v = validate_morel(&op, &c, &fam);
            (c, v)
        }
    };
    let (sampled, m_raw) = if let Some(msign) = &cfg.problem.m_sign {
        let m = msign.sample(&grid).map_err(|e| anyhow!("{e}"))?;
        (None, Some(m))
    } else {
        let rp = cfg
            .radial_problem()
            .ok_or_else(|| anyhow!("radial problems need K and M"))?;
        (Some(rp.sample(&grid).map_err(|e| anyhow!("{e}"))?), None)
    };
    Ok(RadialData {
        grid,
        ball,
        op,
        consts,
        held_out_violations,
        sampled,
        m_raw,
    })
}

fn morel_json(data: &RadialData) -> Json {
    let mut j = Json::obj();
    j.push("c_lower", Json::Num(data.consts.c_lower));
    j.push("c_upper", Json::Num(data.consts.c_upper));
    j.push("q", Json::Num(data.consts.q));
    j.push(
        "provenance",
        Json::Str(
            if data.consts.is_estimated() {
                "estimated"
            } else {
                "user_supplied"
            }
            .into(),
        ),
    );
    j.push(
        "held_out_violations",
        Json::Int(data.held_out_violations as i64),
    );
    j
}

fn run_radial_certify(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let data = radial_data(cfg)?;
    let mut reps: Vec<CertificateReport> = Vec::new();
    if let Some(sr) = &data.sampled {
        match suff_bola(sr, &data.consts) {
            Ok(rep) => reps.push(rep),
            Err(sdl_core::error::CoreError::HypothesisViolated(msg)) => {
                reps.push(CertificateReport::not_applicable(CertificateId::Bola, &msg))
            }
            Err(e) => bail!("{e}"),
        }
        if sr.spec.alpha <= sr.spec.gamma + 1e-12 {
            let bound = lambda_necessary_upper_radial(sr, &data.op, &data.consts)
                .map_err(|e| anyhow!("{e}"))?;
            let mut constants = std::collections::BTreeMap::new();
            constants.insert("lambda_upper".to_string(), bound);
            reps.push(CertificateReport::build(
                CertificateId::NecessaryUpperRadial,
                sr.spec.lambda,
                bound,
                true,
                constants,
                if data.consts.is_estimated() {
                    "empirical certificate: comparison constants estimated from test loads"
                } else {
                    ""
                },
            ));
        }
        match lambda0_lower_algo_radial(sr, &data.consts) {
            Ok(bound) => {
                let mut constants = std::collections::BTreeMap::new();
                constants.insert("lambda0_lower".to_string(), bound.value);
                reps.push(CertificateReport::build(
                    CertificateId::AlgoLowerRadial,
                    sr.spec.lambda,
                    bound.value,
                    false,
                    constants,
                    if bound.degenerate_m_zero {
                        "M vanishes: bound degenerates to +inf"
                    } else {
                        "lambda <= bound guarantees a solution"
                    },
                ));
            }
            Err(sdl_core::error::CoreError::HypothesisViolated(_)) => {}
            Err(e) => bail!("{e}"),
        }
    } else if let Some(m) = &data.m_raw {
        // Sign-changing necessary screen on the ball: S(m) > 0.
        let positive = sign_changing_screen(&data.op, m);
        let mut constants = std::collections::BTreeMap::new();
        constants.insert("min_s_m".to_string(), data.op.apply(m).min_value());
        constants.insert(
            "int_m_plus_delta".to_string(),
            ball_delta_moment(&data.ball, &m.positive_part()),
        );
        constants.insert(
            "int_m_minus_delta".to_string(),
            ball_delta_moment(&data.ball, &m.negative_part()),
        );
        reps.push(CertificateReport::build(
            CertificateId::SignChangingNec,
            if positive { 0.0 } else { 1.0 },
            0.5,
            true,
            constants,
            "S(m) > 0 on the open ball is necessary for a W^{2,q} solution",
        ));
    }
    let mut report = report_skeleton(cfg, &data.grid);
    report.push("morel_constants", morel_json(&data));
    report.push("certificates", certificates_json(&reps));
    let exit_code = if data.held_out_violations > 0 || applicable_failure(&reps) {
        2
    } else {
        0
    };
    Ok(RunOutput {
        report,
        files: Vec::new(),
        exit_code,
    })
}

fn run_radial_solve(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let data = radial_data(cfg)?;
    let (k, m, pd) = if let Some(m_raw) = &data.m_raw {
        if !sign_changing_screen(&data.op, m_raw) {
            bail!(
                "sign-changing screen failed: S(m) is not strictly positive \
                 on the open ball, so no W^{{2,q}} solution exists"
            );
        }
        let gamma = cfg.problem.gamma;
        (
            m_raw.positive_part(),
            m_raw.negative_part(),
            ProblemData {
                alpha: gamma,
                gamma,
                lambda: 1.0,
            },
        )
    } else {
        let sr = data.sampled.as_ref().expect("radial data sampled");
        (
            sr.k.clone(),
            sr.m.clone(),
            ProblemData {
                alpha: sr.spec.alpha,
                gamma: sr.spec.gamma,
                lambda: sr.spec.lambda,
            },
        )
    };
    let params = ConstructiveParams::plain(&data.op, &k);
    let out = fixed_point_iterate(&data.op, &k, &m, pd, &params, &solve_options(cfg))
        .map_err(|e| anyhow!("{e}"))?;
    let mut csv = Csv::new("r,u,delta");
    for j in 0..out.u.len() {
        csv.row(&[
            CsvCell::Num(data.grid.points()[j]),
            CsvCell::Num(out.u.values()[j]),
            CsvCell::Num(data.op.delta()[j]),
        ]);
    }
    let mut report = report_skeleton(cfg, &data.grid);
    report.push("morel_constants", morel_json(&data));
    report.push("solve", solve_json(&out, &params));
    report.push(
        "outputs",
        Json::Arr(vec![
            Json::Str("report.json".into()),
            Json::Str("radial.csv".into()),
        ]),
    );
    let exit_code = if out.status != SolveStatus::Converged {
        3
    } else {
        0
    };
    Ok(RunOutput {
        report,
        files: vec![("radial.csv".to_string(), csv.to_text())],
        exit_code,
    })
}

/// Run a validated config.
pub fn run(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    match cfg.command.expect("command resolved by parse_config") {
        Command::Certify => run_certify(cfg),
        Command::Solve => run_solve(cfg),
        Command::Threshold => run_threshold(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::RadialCertify => run_radial_certify(cfg),
        Command::RadialSolve => run_radial_solve(cfg),
    }
}
