//! The constructive solver driven by the ball-domain operator: the same
//! code paths as the interval lane, with the radial geometry injected.

use sdl_core::domain::BallDomain;
use sdl_core::funcspec::FunctionSpec;
use sdl_core::grid::build_grid;
use sdl_core::gridfn::GridFn;
use sdl_core::radial::{RadialOperator, RadialProblem};
use sdl_core::solver::{
    fixed_point_iterate, subsolution_scale_for_alpha_gt_gamma, weak_residual_data,
    ConstructiveParams, ProblemData, SolveOptions, SolveStatus,
};

#[test]
fn manufactured_radial_solution() {
    // u* = (1 - r^2)/(2N) solves -Delta u = 1 = K u^{-gamma} for
    // K = (u*)^{gamma}, M = 0.
    for nn in [2u32, 3] {
        let ball = BallDomain::new(1.0, nn).unwrap();
        let grid = build_grid(ball.radial_interval(), 400, 2.0).unwrap();
        let op = RadialOperator::new(&grid, &ball).unwrap();
        let gamma = 0.4;
        let exact = GridFn::from_fn(&grid, |r| (1.0 - r * r) / (2.0 * nn as f64));
        let k = exact.powf(gamma);
        let m = GridFn::zeros(&grid);
        let params = ConstructiveParams::plain(&op, &k);
        let pd = ProblemData {
            alpha: gamma,
            gamma,
            lambda: 1.0,
        };
        let out = fixed_point_iterate(&op, &k, &m, pd, &params, &SolveOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        let err = out.u.sup_distance(&exact);
        assert!(err <= 1e-8, "N = {nn}: sup error {err}");
        assert!(out.weak_residual <= 1e-6);
    }
}

#[test]
fn radial_indefinite_solve_and_alpha_gt_gamma_scaling() {
    // Solve the homogeneous (alpha = gamma) ball problem at lambda = 1,
    // then scale the solution into a subsolution for alpha > gamma with the
    // guaranteed lambda_0 = eps^{1+gamma}, and verify the one-sided weak
    // inequality.
    let ball = BallDomain::new(1.0, 2).unwrap();
    let grid = build_grid(ball.radial_interval(), 300, 2.0).unwrap();
    let op = RadialOperator::new(&grid, &ball).unwrap();
    let gamma = 0.25;
    let sr = RadialProblem {
        ball,
        k: FunctionSpec::constant(1.0),
        m: FunctionSpec::Bump {
            center: 0.4,
            width: 0.2,
            height: 0.5,
        },
        alpha: gamma,
        gamma,
        lambda: 1.0,
        p: 3.0,
    }
    .sample(&grid)
    .unwrap();
    let params = ConstructiveParams::plain(&op, &sr.k);
    let pd = ProblemData {
        alpha: gamma,
        gamma,
        lambda: 1.0,
    };
    let out =
        fixed_point_iterate(&op, &sr.k, &sr.m, pd, &params, &SolveOptions::default()).unwrap();
    assert_eq!(out.status, SolveStatus::Converged);
    assert!(out.positivity_margin > 0.0);

    let alpha = 0.75;
    let (sub, lambda0) = subsolution_scale_for_alpha_gt_gamma(&out.u, alpha, gamma).unwrap();
    assert!(lambda0 > 0.0 && lambda0 <= 1.0);
    // Subsolution inequality for the alpha > gamma problem at lambda_0:
    // a(v, phi) - L(phi) <= slack for every nonnegative hat.
    let pd_sub = ProblemData {
        alpha,
        gamma,
        lambda: lambda0,
    };
    let res = weak_residual_data(&sub, &sr.k, &sr.m, pd_sub, &op).unwrap();
    assert!(
        res.max_signed <= 1e-8,
        "one-sided subsolution residual {}",
        res.max_signed
    );
}

#[test]
fn radial_supercritical_lambda_loses_positivity() {
    let ball = BallDomain::new(1.0, 2).unwrap();
    let grid = build_grid(ball.radial_interval(), 200, 2.0).unwrap();
    let op = RadialOperator::new(&grid, &ball).unwrap();
    let k = GridFn::from_fn(&grid, |_| 1.0);
    let m = GridFn::from_fn(&grid, |_| 1.0);
    let params = ConstructiveParams::plain(&op, &k);
    let pd = ProblemData {
        alpha: 1.0,
        gamma: 1.0,
        lambda: 3.0,
    };
    let out = fixed_point_iterate(&op, &k, &m, pd, &params, &SolveOptions::default()).unwrap();
    assert!(matches!(
        out.status,
        SolveStatus::Nonpositive | SolveStatus::LeftCone
    ));
}
