//! Numerical laboratory for the singular Dirichlet problem
//! `-u'' = K(x) u^{-alpha} - lambda M(x) u^{-gamma}`, `u > 0` in `Omega`,
//! `u = 0` on the boundary, on intervals and (radially) on balls.
//!
//! The crate provides:
//! - graded meshes, singular-weight quadrature and sampled functions
//!   ([`grid`], [`quad`], [`funcspec`], [`gridfn`]);
//! - the exact solution operator of the Dirichlet Laplacian with its sharp
//!   distance-to-boundary comparison coefficients ([`greens`], [`radial`]);
//! - evaluable existence and nonexistence certificates with full
//!   intermediate constants ([`certificates`]);
//! - a constructive fixed-point solver with cone tracking, sub- and
//!   supersolution builders and weak-residual verification ([`solver`]);
//! - an empirical map of the existence threshold `lambda_0` sandwiched by
//!   the analytic bounds ([`threshold`]).

// Validation guards are written as `!(x > bound)` on purpose: the negated
// form rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod domain;
pub mod error;
pub mod funcspec;
pub mod greens;
pub mod grid;
pub mod gridfn;
pub mod quad;
pub mod radial;
pub mod solver;
pub mod threshold;

pub use domain::{BallDomain, Domain1D};
pub use error::{CoreError, Result};
pub use funcspec::FunctionSpec;
pub use greens::{cone_coefficients, ConeCoefficients, GreenOperator, SolutionOperator};
pub use grid::{build_grid, default_grading, GradedGrid};
pub use gridfn::GridFn;
pub use quad::{delta_negpow_norm_closed_form, integrate, lp_norm, Weight};
