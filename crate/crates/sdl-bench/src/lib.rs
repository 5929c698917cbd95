//! Shared fixtures for the benchmark suite.

use std::sync::Arc;

use sdl_core::certificates::{ProblemSpec, SampledProblem};
use sdl_core::domain::Domain1D;
use sdl_core::funcspec::FunctionSpec;
use sdl_core::grid::{build_grid, default_grading, GradedGrid};

/// The certified flagship instance `K = 1`, `M = 0.1`,
/// `alpha = gamma = 1/4` on the unit interval.
pub fn flagship(n: usize) -> (Arc<GradedGrid>, SampledProblem) {
    let dom = Domain1D::new(0.0, 1.0).unwrap();
    let grid = build_grid(dom, n, default_grading(0.25)).unwrap();
    let sp = ProblemSpec {
        domain: dom,
        k: FunctionSpec::constant(1.0),
        m: FunctionSpec::constant(0.1),
        alpha: 0.25,
        gamma: 0.25,
        lambda: 1.0,
        p: 2.0,
    }
    .sample(&grid)
    .unwrap();
    (grid, sp)
}
