//! The catalog of coefficient functions: constants, endpoint powers
//! `(x-a)^s (b-x)^t`, smooth bumps, offset sine waves, and tabulated data.
//!
//! Each spec evaluates pointwise on a given interval and can report a
//! declared support, which the certificates use for the distance of
//! `supp M` to the boundary.

use serde::{Deserialize, Serialize};

use crate::domain::Domain1D;
use crate::error::{CoreError, Result};
use crate::grid::GradedGrid;
use crate::gridfn::GridFn;
use std::sync::Arc;

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `c`
    #[serde(alias = "const")]
    Constant { c: f64 },
    /// `scale * (x - a)^s * (b - x)^t` with `s, t > -1`
    Power {
        s: f64,
        t: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Smooth compactly supported bump `height * exp(1 - 1/(1 - z^2))`,
    /// `z = (x - center)/width`, zero for `|z| >= 1`.
    Bump {
        center: f64,
        width: f64,
        height: f64,
    },
    /// `sin(2 pi frequency (x - a)/(b - a)) + offset`
    Sinesign { frequency: f64, offset: f64 },
    /// Piecewise-linear interpolation of `(xs, vals)`, constant outside.
    Table { xs: Vec<f64>, vals: Vec<f64> },
}

impl FunctionSpec {
    pub fn constant(c: f64) -> Self {
        FunctionSpec::Constant { c }
    }

    /// Validate parameters against a domain.
    pub fn validate(&self, dom: &Domain1D) -> Result<()> {
        match self {
            FunctionSpec::Constant { c } => {
                if !c.is_finite() {
                    return Err(CoreError::InvalidFunction("constant must be finite".into()));
                }
            }
            FunctionSpec::Power { s, t, scale } => {
                if !(s.is_finite() && t.is_finite() && scale.is_finite()) {
                    return Err(CoreError::InvalidFunction(
                        "power parameters must be finite".into(),
                    ));
                }
                if *s <= -1.0 || *t <= -1.0 {
                    return Err(CoreError::InvalidFunction(format!(
                        "power exponents must exceed -1 for integrability, got s={s}, t={t}"
                    )));
                }
            }
            FunctionSpec::Bump {
                center,
                width,
                height,
            } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(CoreError::InvalidFunction(format!(
                        "bump width must be positive, got {width}"
                    )));
                }
                if !(center.is_finite() && height.is_finite()) {
                    return Err(CoreError::InvalidFunction(
                        "bump center/height must be finite".into(),
                    ));
                }
                let _ = dom;
            }
            FunctionSpec::Sinesign { frequency, offset } => {
                if !(frequency.is_finite() && offset.is_finite()) {
                    return Err(CoreError::InvalidFunction(
                        "sinesign parameters must be finite".into(),
                    ));
                }
            }
            FunctionSpec::Table { xs, vals } => {
                if xs.len() < 2 || xs.len() != vals.len() {
                    return Err(CoreError::InvalidFunction(
                        "table needs matching xs/vals with at least two entries".into(),
                    ));
                }
                for w in xs.windows(2) {
                    if w[1] <= w[0] {
                        return Err(CoreError::InvalidFunction(
                            "table abscissae must be strictly increasing".into(),
                        ));
                    }
                }
                if xs[0] < dom.a() - 1e-12 || xs[xs.len() - 1] > dom.b() + 1e-12 {
                    return Err(CoreError::InvalidFunction(format!(
                        "table abscissae must lie within [{}, {}]",
                        dom.a(),
                        dom.b()
                    )));
                }
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(CoreError::InvalidFunction(
                        "table values must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, dom: &Domain1D) -> f64 {
        match self {
            FunctionSpec::Constant { c } => *c,
            FunctionSpec::Power { s, t, scale } => {
                let u = (x - dom.a()).max(0.0);
                let v = (dom.b() - x).max(0.0);
                scale * u.powf(*s) * v.powf(*t)
            }
            FunctionSpec::Bump {
                center,
                width,
                height,
            } => {
                let z = (x - center) / width;
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / (1.0 - z * z)).exp()
                }
            }
            FunctionSpec::Sinesign { frequency, offset } => {
                let t = (x - dom.a()) / dom.length();
                (2.0 * std::f64::consts::PI * frequency * t).sin() + offset
            }
            FunctionSpec::Table { xs, vals } => {
                if x <= xs[0] {
                    return vals[0];
                }
                if x >= xs[xs.len() - 1] {
                    return vals[vals.len() - 1];
                }
                let i = xs.partition_point(|&t| t <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                vals[i] * (1.0 - t) + vals[i + 1] * t
            }
        }
    }

    /// Sample onto the quadrature abscissae of a grid.
    pub fn sample(&self, grid: &Arc<GradedGrid>) -> Result<GridFn> {
        self.validate(grid.domain())?;
        let dom = *grid.domain();
        let values: Vec<f64> = grid.points().iter().map(|&x| self.eval(x, &dom)).collect();
        Ok(GridFn::new(grid.clone(), values))
    }

    /// Support interval declared by the spec itself, when it has one.
    pub fn declared_support(&self, dom: &Domain1D) -> Option<(f64, f64)> {
        match self {
            FunctionSpec::Bump { center, width, .. } => {
                Some(((center - width).max(dom.a()), (center + width).min(dom.b())))
            }
            FunctionSpec::Table { xs, vals } => {
                let lo = xs
                    .iter()
                    .zip(vals)
                    .find(|(_, v)| v.abs() > 1e-14)
                    .map(|(x, _)| *x)?;
                let hi = xs
                    .iter()
                    .zip(vals)
                    .rev()
                    .find(|(_, v)| v.abs() > 1e-14)
                    .map(|(x, _)| *x)?;
                // Linear interpolation reaches one table cell beyond the
                // outermost nonzero entries.
                let i_lo = xs.iter().position(|&x| x == lo).unwrap();
                let i_hi = xs.iter().rposition(|&x| x == hi).unwrap();
                let lo = if i_lo > 0 { xs[i_lo - 1] } else { lo };
                let hi = if i_hi + 1 < xs.len() {
                    xs[i_hi + 1]
                } else {
                    hi
                };
                Some((lo.max(dom.a()), hi.min(dom.b())))
            }
            _ => None,
        }
    }
}

/// Support of a sampled function: the declared support when available,
/// otherwise the hull of abscissae where `|h| > 1e-14 * max|h|`. A nonzero
/// value at the outermost abscissa means the sample cannot distinguish the
/// function from one supported up to the boundary, so the hull is widened
/// to the endpoint there.
pub fn support_interval(spec: &FunctionSpec, h: &GridFn) -> Option<(f64, f64)> {
    let dom = *h.grid().domain();
    if let Some(s) = spec.declared_support(&dom) {
        return Some(s);
    }
    let scale = h.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let pts = h.grid().points();
    let last = h.len() - 1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (j, v) in h.values().iter().enumerate() {
        if v.abs() > 1e-14 * scale {
            lo = lo.min(if j == 0 { dom.a() } else { pts[j] });
            hi = hi.max(if j == last { dom.b() } else { pts[j] });
        }
    }
    if lo <= hi {
        Some((lo, hi))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;

    fn unit_grid() -> Arc<GradedGrid> {
        build_grid(Domain1D::new(0.0, 1.0).unwrap(), 64, 2.0).unwrap()
    }

    #[test]
    fn constant_samples_flat() {
        let g = unit_grid();
        let f = FunctionSpec::constant(1.0).sample(&g).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn power_matches_pointwise_product() {
        let dom = Domain1D::new(0.0, 1.0).unwrap();
        let f = FunctionSpec::Power {
            s: 1.0,
            t: 1.0,
            scale: 1.0,
        };
        assert_relative_eq!(f.eval(0.5, &dom), 0.25);
        assert_relative_eq!(f.eval(0.25, &dom), 0.1875);
    }

    #[test]
    fn sinesign_offset_where_sine_vanishes() {
        let dom = Domain1D::new(0.0, 1.0).unwrap();
        let f = FunctionSpec::Sinesign {
            frequency: 1.0,
            offset: 0.2,
        };
        assert_relative_eq!(f.eval(0.5, &dom), 0.2, epsilon = 1e-12);
        assert_relative_eq!(f.eval(0.0, &dom), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let dom = Domain1D::new(0.0, 1.0).unwrap();
        let f = FunctionSpec::Bump {
            center: 0.5,
            width: 0.1,
            height: 2.0,
        };
        assert_eq!(f.eval(0.39, &dom), 0.0);
        assert_eq!(f.eval(0.61, &dom), 0.0);
        assert_relative_eq!(f.eval(0.5, &dom), 2.0);
        assert_eq!(f.declared_support(&dom), Some((0.4, 0.6)));
    }

    #[test]
    fn table_interpolates_and_extends() {
        let dom = Domain1D::new(0.0, 1.0).unwrap();
        let f = FunctionSpec::Table {
            xs: vec![0.2, 0.5, 0.8],
            vals: vec![1.0, 3.0, 2.0],
        };
        f.validate(&dom).unwrap();
        assert_relative_eq!(f.eval(0.35, &dom), 2.0);
        assert_relative_eq!(f.eval(0.1, &dom), 1.0);
        assert_relative_eq!(f.eval(0.9, &dom), 2.0);
    }

    #[test]
    fn table_outside_domain_rejected() {
        let dom = Domain1D::new(0.0, 1.0).unwrap();
        let f = FunctionSpec::Table {
            xs: vec![-0.5, 0.5],
            vals: vec![1.0, 1.0],
        };
        assert!(f.validate(&dom).is_err());
    }

    #[test]
    fn invalid_power_exponent_rejected() {
        let dom = Domain1D::new(0.0, 1.0).unwrap();
        let f = FunctionSpec::Power {
            s: -1.0,
            t: 0.0,
            scale: 1.0,
        };
        assert!(f.validate(&dom).is_err());
    }

    #[test]
    fn serde_kind_tags_round_trip() {
        let f = FunctionSpec::Bump {
            center: 0.5,
            width: 0.1,
            height: 2.0,
        };
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"kind\":\"bump\""));
        let g: FunctionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        // The abbreviated constant tag is accepted.
        let c: FunctionSpec = serde_json::from_str(r#"{"kind":"const","c":-1.0}"#).unwrap();
        assert_eq!(c, FunctionSpec::constant(-1.0));
    }
}
