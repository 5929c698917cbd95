//! Domains: open intervals `(a, b)` and balls `B_R` in dimension `N >= 2`.
//!
//! Solutions of the singular problems treated here are compared against
//! multiples of the distance to the boundary, so both domain types expose
//! `delta`, with `delta(x) = min(x - a, b - x)` on an interval and
//! `delta(r) = R - r` on a ball of radius `R`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A bounded open interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    a: f64,
    b: f64,
}

impl Domain1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(CoreError::InvalidDomain(format!(
                "interval requires finite a < b, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Distance to the boundary, `min(x - a, b - x)`.
    pub fn delta(&self, x: f64) -> f64 {
        (x - self.a).min(self.b - x)
    }

    /// `sup delta = (b - a) / 2`, attained at the midpoint.
    pub fn sup_delta(&self) -> f64 {
        0.5 * self.length()
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }
}

/// The ball `B_R = { x in R^N : |x| < R }` with `N >= 2`.
///
/// `omega` is the surface area of the unit sphere in `R^N`,
/// `2 pi^{N/2} / Gamma(N/2)`; it enters every radial volume integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    radius: f64,
    dim: u32,
    omega: f64,
}

impl BallDomain {
    pub fn new(radius: f64, dim: u32) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CoreError::InvalidDomain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if dim < 2 {
            return Err(CoreError::InvalidDomain(format!(
                "ball dimension must be >= 2, got {dim}"
            )));
        }
        Ok(Self {
            radius,
            dim,
            omega: unit_sphere_area(dim),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Surface area of the unit sphere `partial B_1` in `R^N`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Distance of the radius-`r` sphere to the boundary.
    pub fn delta(&self, r: f64) -> f64 {
        self.radius - r
    }

    /// The radial slice `(0, R)` the numerical grid lives on.
    pub fn radial_interval(&self) -> Domain1D {
        Domain1D {
            a: 0.0,
            b: self.radius,
        }
    }
}

/// `2 pi^{N/2} / Gamma(N/2)` for integer `N`, via the half-integer Gamma
/// recursion so that small dimensions are exact.
fn unit_sphere_area(dim: u32) -> f64 {
    use std::f64::consts::PI;
    // Gamma(N/2): start from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    let mut g = if dim.is_multiple_of(2) {
        1.0
    } else {
        PI.sqrt()
    };
    let mut k = if dim.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k < dim as f64 / 2.0 - 0.25 {
        g *= k;
        k += 1.0;
    }
    2.0 * PI.powf(dim as f64 / 2.0) / g
}
