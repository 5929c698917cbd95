//! Run configuration: JSON schema, validation, and defaults.
//!
//! A config names the problem (domain, coefficients, exponents), the
//! command to run, numerical parameters, and per-command extras. Parsing
//! reports every violation at once rather than stopping at the first.

use serde::{Deserialize, Serialize};

use sdl_core::certificates::ProblemSpec;
use sdl_core::domain::{BallDomain, Domain1D};
use sdl_core::funcspec::FunctionSpec;
use sdl_core::radial::RadialProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Certify,
    Solve,
    Threshold,
    Sweep,
    RadialCertify,
    RadialSolve,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Solve => "solve",
            Command::Threshold => "threshold",
            Command::Sweep => "sweep",
            Command::RadialCertify => "radial-certify",
            Command::RadialSolve => "radial-solve",
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Command::RadialCertify | Command::RadialSolve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainConfig {
    Interval { a: f64, b: f64 },
    Ball { radius: f64, dim: u32 },
}

/// Integrability exponent: a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(pub f64);

impl Serialize for PExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PExponent(v)),
            Raw::Str(s) if s == "inf" || s == "infinity" => Ok(PExponent(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "p must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainConfig,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<FunctionSpec>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<FunctionSpec>,
    /// Sign-changing data for the single-equation problem
    /// `-u'' = m u^{-gamma}`; mutually exclusive with `K`/`M`.
    #[serde(rename = "m_sign", default, skip_serializing_if = "Option::is_none")]
    pub m_sign: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub gamma: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub p: PExponent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Auto,
    Value(f64),
}

impl Serialize for Grading {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Grading::Auto => s.serialize_str("auto"),
            Grading::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Grading {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Grading::Value(v)),
            Raw::Str(s) if s == "auto" => Ok(Grading::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "grading must be a number or \"auto\", got \"{s}\""
            ))),
        }
    }
}

fn default_n() -> usize {
    400
}
fn default_grading() -> Grading {
    Grading::Auto
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    500
}
fn default_residual_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_grading")]
    pub grading: Grading,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Picard relaxation; omitted means 1 for direct solves and the
    /// automatic `1/(1+gamma)` for threshold probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<f64>,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n: default_n(),
            grading: default_grading(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            relaxation: None,
            residual_tol: default_residual_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub bracket: (f64, f64),
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: sdl_core::threshold::SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorelConfig {
    /// Norm exponent for the upper comparison; defaults to `N + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default = "default_output", skip_serializing_if = "is_default_output")]
    pub output_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<MorelConfig>,
}

fn default_output() -> String {
    ".".into()
}
fn is_default_output(s: &String) -> bool {
    s == "."
}

/// A function that is structurally guaranteed nonnegative on its domain.
fn structurally_nonnegative(f: &FunctionSpec) -> bool {
    match f {
        FunctionSpec::Constant { c } => *c >= 0.0,
        FunctionSpec::Power { scale, .. } => *scale >= 0.0,
        FunctionSpec::Bump { height, .. } => *height >= 0.0,
        FunctionSpec::Sinesign { offset, .. } => *offset >= 1.0,
        FunctionSpec::Table { vals, .. } => vals.iter().all(|v| *v >= 0.0),
    }
}

/// Parse and validate a config document, reporting every violation.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig, String> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
    match cfg.command {
        None => cfg.command = Some(command),
        Some(c) if c == command => {}
        Some(c) => {
            return Err(format!(
                "config names command {:?} but the CLI invoked {:?}",
                c.as_str(),
                command.as_str()
            ))
        }
    }
    let mut violations: Vec<String> = Vec::new();
    let p = &cfg.problem;

    match p.domain {
        DomainConfig::Interval { a, b } => {
            if !(a.is_finite() && b.is_finite() && a < b) {
                violations.push(format!("domain: interval requires a < b, got ({a}, {b})"));
            }
            if command.is_radial() {
                violations.push("domain: radial commands require a ball domain".into());
            }
        }
        DomainConfig::Ball { radius, dim } => {
            if !(radius > 0.0) {
                violations.push(format!(
                    "domain: ball radius must be positive, got {radius}"
                ));
            }
            if dim < 2 {
                violations.push(format!("domain: ball dimension must be >= 2, got {dim}"));
            }
            if !command.is_radial() {
                violations.push(
                    "domain: only radial data on balls is supported; use \
                     radial-certify or radial-solve (general non-radial \
                     domains are out of scope)"
                        .into(),
                );
            }
        }
    }

    let sign_changing = p.m_sign.is_some();
    if sign_changing {
        if p.k.is_some() || p.m.is_some() {
            violations.push("problem: m_sign is mutually exclusive with K and M".into());
        }
    } else {
        match &p.k {
            None => violations.push("problem: K is required (or provide m_sign)".into()),
            Some(k) if !structurally_nonnegative(k) => {
                violations.push("K must be nonnegative".into())
            }
            _ => {}
        }
        match &p.m {
            None => violations.push("problem: M is required (or provide m_sign)".into()),
            Some(m) if !structurally_nonnegative(m) => {
                violations.push("M must be nonnegative".into())
            }
            _ => {}
        }
    }

    let alpha = p.alpha.unwrap_or(p.gamma);
    if !(alpha > 0.0) {
        violations.push(format!("alpha must be positive, got {alpha}"));
    }
    if !(p.gamma > 0.0) {
        violations.push(format!("gamma must be positive, got {}", p.gamma));
    }
    if !(p.lambda > 0.0) {
        violations.push(format!("lambda must be positive, got {}", p.lambda));
    }
    match p.domain {
        DomainConfig::Interval { .. } => {
            if !(p.p.0 >= 2.0) {
                violations.push(format!("p must be >= 2 or \"inf\", got {}", p.p.0));
            }
        }
        DomainConfig::Ball { dim, .. } => {
            if !(p.p.0 > dim as f64) {
                violations.push(format!(
                    "p must exceed the dimension N = {dim}, got {}",
                    p.p.0
                ));
            }
        }
    }

    let num = &cfg.numerics;
    if num.n < 8 {
        violations.push(format!("numerics.n must be >= 8, got {}", num.n));
    }
    if let Grading::Value(g) = num.grading {
        if !(g >= 1.0) {
            violations.push(format!("numerics.grading must be >= 1, got {g}"));
        }
    }
    if !(num.tol > 0.0) {
        violations.push(format!("numerics.tol must be positive, got {}", num.tol));
    }
    if let Some(r) = num.relaxation {
        if !(r > 0.0 && r <= 1.0) {
            violations.push(format!("numerics.relaxation must lie in (0, 1], got {r}"));
        }
    }

    match command {
        Command::Threshold => {
            match &cfg.threshold {
                None => violations.push("threshold: bracket required".into()),
                Some(t) => {
                    if !(t.bracket.0 > 0.0 && t.bracket.1 > t.bracket.0) {
                        violations.push(format!(
                            "threshold.bracket must satisfy 0 < lo < hi, got ({}, {})",
                            t.bracket.0, t.bracket.1
                        ));
                    }
                    if !(t.rel_tol > 0.0 && t.rel_tol < 1.0) {
                        violations.push(format!(
                            "threshold.rel_tol must lie in (0, 1), got {}",
                            t.rel_tol
                        ));
                    }
                }
            }
            if sign_changing {
                violations.push("threshold: requires K/M data, not m_sign".into());
            }
        }
        Command::Sweep => match &cfg.sweep {
            None => violations.push("sweep: axis and values required".into()),
            Some(s) => {
                if s.values.is_empty() {
                    violations.push("sweep.values must be nonempty".into());
                }
                if s.values.first().copied().unwrap_or(1.0) <= 0.0 {
                    violations.push("sweep.values must be positive".into());
                }
                if s.values.windows(2).any(|w| w[1] <= w[0]) {
                    violations.push("sweep.values must be strictly increasing".into());
                }
            }
        },
        _ => {}
    }

    if let Some(r) = &cfg.radial {
        match (r.c_lower, r.c_upper) {
            (Some(lo), Some(hi)) => {
                if !(lo > 0.0 && hi > 0.0) {
                    violations.push("radial constants must be positive".into());
                }
            }
            (None, None) => {}
            _ => violations.push("radial: c_lower and c_upper must be supplied together".into()),
        }
    }

    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(violations.join("; "))
    }
}

impl RunConfig {
    pub fn alpha(&self) -> f64 {
        self.problem.alpha.unwrap_or(self.problem.gamma)
    }

    /// Resolved grading exponent.
    pub fn grading_value(&self) -> f64 {
        match self.numerics.grading {
            Grading::Value(g) => g,
            Grading::Auto => sdl_core::grid::default_grading(self.problem.gamma),
        }
    }

    pub fn interval(&self) -> Option<Domain1D> {
        match self.problem.domain {
            DomainConfig::Interval { a, b } => Domain1D::new(a, b).ok(),
            _ => None,
        }
    }

    pub fn ball(&self) -> Option<BallDomain> {
        match self.problem.domain {
            DomainConfig::Ball { radius, dim } => BallDomain::new(radius, dim).ok(),
            _ => None,
        }
    }

    /// The interval problem, when the config carries K/M data.
    pub fn problem_spec(&self) -> Option<ProblemSpec> {
        let domain = self.interval()?;
        Some(ProblemSpec {
            domain,
            k: self.problem.k.clone()?,
            m: self.problem.m.clone()?,
            alpha: self.alpha(),
            gamma: self.problem.gamma,
            lambda: self.problem.lambda,
            p: self.problem.p.0,
        })
    }

    pub fn radial_problem(&self) -> Option<RadialProblem> {
        let ball = self.ball()?;
        Some(RadialProblem {
            ball,
            k: self.problem.k.clone()?,
            m: self.problem.m.clone()?,
            alpha: self.alpha(),
            gamma: self.problem.gamma,
            lambda: self.problem.lambda,
            p: self.problem.p.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {
            "domain": {"interval": {"a": 0.0, "b": 1.0}},
            "K": {"kind": "constant", "c": 1.0},
            "M": {"kind": "constant", "c": 0.1},
            "gamma": 0.25,
            "p": 2.0
        }
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL, Command::Certify).unwrap();
        assert_eq!(cfg.numerics.n, 400);
        assert_eq!(cfg.numerics.tol, 1e-10);
        assert_eq!(cfg.numerics.max_iter, 500);
        assert_eq!(cfg.command, Some(Command::Certify));
        assert_eq!(cfg.alpha(), 0.25);
        assert_eq!(cfg.problem.lambda, 1.0);
        // Auto grading resolves from gamma.
        assert!(cfg.grading_value() >= 2.0);
    }

    #[test]
    fn negative_k_rejected_with_message() {
        let text = MINIMAL.replace("\"c\": 1.0", "\"c\": -1.0");
        let err = parse_config(&text, Command::Certify).unwrap_err();
        assert!(err.contains("K must be nonnegative"), "{err}");
    }

    #[test]
    fn ball_domain_with_interval_command_rejected() {
        let text = MINIMAL
            .replace(
                r#"{"interval": {"a": 0.0, "b": 1.0}}"#,
                r#"{"ball": {"radius": 1.0, "dim": 2}}"#,
            )
            .replace("\"p\": 2.0", "\"p\": 3.0");
        let err = parse_config(&text, Command::Solve).unwrap_err();
        assert!(err.contains("radial"), "{err}");
    }

    #[test]
    fn every_violation_is_listed() {
        let text = r#"{
            "problem": {
                "domain": {"interval": {"a": 1.0, "b": 0.0}},
                "K": {"kind": "constant", "c": -1.0},
                "M": {"kind": "constant", "c": 0.1},
                "gamma": -0.25,
                "lambda": -1.0,
                "p": 1.5
            },
            "numerics": {"n": 4}
        }"#;
        let err = parse_config(text, Command::Certify).unwrap_err();
        for needle in [
            "a < b",
            "K must be nonnegative",
            "gamma",
            "lambda",
            "p must be",
            "n must be",
        ] {
            assert!(err.contains(needle), "missing {needle} in {err}");
        }
    }

    #[test]
    fn p_inf_accepted() {
        let text = MINIMAL.replace("\"p\": 2.0", "\"p\": \"inf\"");
        let cfg = parse_config(&text, Command::Certify).unwrap();
        assert!(cfg.problem.p.0.is_infinite());
    }

    #[test]
    fn command_mismatch_rejected() {
        let text = MINIMAL.replace("\"problem\"", "\"command\": \"solve\", \"problem\"");
        assert!(parse_config(&text, Command::Certify).is_err());
        assert!(parse_config(&text, Command::Solve).is_ok());
    }

    #[test]
    fn threshold_requires_bracket() {
        assert!(parse_config(MINIMAL, Command::Threshold).is_err());
        let with = MINIMAL.replace(
            "\"problem\"",
            "\"threshold\": {\"bracket\": [0.01, 2.0]}, \"problem\"",
        );
        let cfg = parse_config(&with, Command::Threshold).unwrap();
        assert_eq!(cfg.threshold.unwrap().rel_tol, 0.01);
    }
}
