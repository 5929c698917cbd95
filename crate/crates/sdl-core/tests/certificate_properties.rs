//! Randomized structural properties of the certificates:
//! the sufficient conditions are ordered (`M2` implies `HIP`),
//! certified existence stays below the necessary bound, the homogeneous
//! certificate is invariant under joint scaling of the data, and the
//! certificate integrals are grid-converged.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdl_core::certificates::{
    lambda_necessary_upper, suff_hip, suff_m2, ProblemSpec, SampledProblem,
};
use sdl_core::domain::Domain1D;
use sdl_core::funcspec::FunctionSpec;
use sdl_core::grid::{build_grid, default_grading, GradedGrid};

fn seed() -> u64 {
    std::env::var("SDL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5D15EED)
}

fn random_coefficient(rng: &mut impl Rng, dom: &Domain1D, allow_zero: bool) -> FunctionSpec {
    let len = dom.length();
    match rng.gen_range(0..4u8) {
        0 => FunctionSpec::Constant {
            c: if allow_zero && rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(0.01..3.0)
            },
        },
        1 => FunctionSpec::Power {
            s: rng.gen_range(0.0..2.5),
            t: rng.gen_range(0.0..2.5),
            scale: rng.gen_range(0.05..4.0),
        },
        2 => FunctionSpec::Bump {
            center: rng.gen_range(dom.a() + 0.25 * len..dom.b() - 0.25 * len),
            width: rng.gen_range(0.05 * len..0.2 * len),
            height: rng.gen_range(0.05..5.0),
        },
        _ => FunctionSpec::Table {
            xs: vec![dom.a(), dom.a() + 0.3 * len, dom.a() + 0.6 * len, dom.b()],
            vals: vec![
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
            ],
        },
    }
}

fn random_instance(
    rng: &mut impl Rng,
    grids: &[(Domain1D, Arc<GradedGrid>)],
) -> Option<SampledProblem> {
    let (dom, grid) = &grids[rng.gen_range(0..grids.len())];
    let gamma = rng.gen_range(0.02..0.48);
    let spec = ProblemSpec {
        domain: *dom,
        k: random_coefficient(rng, dom, false),
        m: random_coefficient(rng, dom, true),
        alpha: gamma,
        gamma,
        lambda: 1.0,
        p: 2.0,
    };
    spec.sample(grid).ok()
}

fn grids() -> Vec<(Domain1D, Arc<GradedGrid>)> {
    [
        (0.0, 1.0),
        (-1.0, 1.0),
        (0.0, 3.0),
        (-2.5, -0.5),
        (0.2, 0.9),
    ]
    .iter()
    .map(|&(a, b)| {
        let dom = Domain1D::new(a, b).unwrap();
        (dom, build_grid(dom, 400, default_grading(0.48)).unwrap())
    })
    .collect()
}

/// Whenever the norm certificate holds the moment certificate must hold;
/// any counterexample is dumped for inspection and fails the build.
#[test]
fn m2_implies_hip_over_500_instances() {
    let grids = grids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let mut counterexamples = 0usize;
    let mut m2_held = 0usize;
    let mut produced = 0usize;
    while produced < 500 {
        let Some(sp) = random_instance(&mut rng, &grids) else {
            continue;
        };
        produced += 1;
        let m2 = suff_m2(&sp).expect("alpha = gamma and gamma in range by construction");
        if !m2.holds {
            continue;
        }
        m2_held += 1;
        let hip = suff_hip(&sp);
        if !hip.holds {
            counterexamples += 1;
            eprintln!(
                "COUNTEREXAMPLE: domain ({}, {}), gamma {}, K {:?}, M {:?}: \
                 M2 margin {}, HIP lhs {} rhs {}",
                sp.spec.domain.a(),
                sp.spec.domain.b(),
                sp.spec.gamma,
                sp.spec.k,
                sp.spec.m,
                m2.margin,
                hip.lhs,
                hip.rhs
            );
        }
    }
    assert!(m2_held > 10, "generator too weak: only {m2_held} M2 passes");
    assert_eq!(counterexamples, 0, "M2 held but HIP failed");
}

/// Certified existence at `lambda = 1` is consistent with the necessary
/// bound: the bound must exceed 1.
#[test]
fn necessary_bound_dominates_certified_existence() {
    let grids = grids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 0xA5);
    let mut produced = 0usize;
    let mut certified = 0usize;
    while produced < 300 {
        let Some(sp) = random_instance(&mut rng, &grids) else {
            continue;
        };
        produced += 1;
        let m2 = suff_m2(&sp).unwrap();
        let hip = suff_hip(&sp);
        if !(m2.holds || hip.holds) {
            continue;
        }
        certified += 1;
        let bound = lambda_necessary_upper(&sp).unwrap();
        assert!(
            bound > 1.0,
            "certified instance with necessary bound {bound} <= 1: \
             K {:?}, M {:?}, gamma {}",
            sp.spec.k,
            sp.spec.m,
            sp.spec.gamma
        );
    }
    assert!(certified > 20, "generator too weak: {certified} certified");
}

/// Joint scaling `(K, M) -> (cK, cM)` changes neither verdict nor the
/// relative margin of the homogeneous certificate.
#[test]
fn m2_joint_scaling_invariance() {
    let grids = grids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 0x77);
    let mut checked = 0usize;
    while checked < 60 {
        let Some(sp) = random_instance(&mut rng, &grids) else {
            continue;
        };
        checked += 1;
        let base = suff_m2(&sp).unwrap();
        for c in [1e-3, 0.37, 42.0, 1e3] {
            let scaled = SampledProblem {
                spec: sp.spec.clone(),
                grid: sp.grid.clone(),
                k: sp.k.scale(c),
                m: sp.m.scale(c),
            };
            let rep = suff_m2(&scaled).unwrap();
            assert_eq!(rep.holds, base.holds, "verdict flipped under scaling");
            if base.rhs > 0.0 && rep.rhs > 0.0 {
                let rel_base = base.margin / base.rhs;
                let rel = rep.margin / rep.rhs;
                assert!(
                    (rel - rel_base).abs() <= 1e-9 * (1.0 + rel_base.abs()),
                    "relative margin changed: {rel} vs {rel_base}"
                );
            }
        }
    }
}

/// Doubling the resolution moves every certificate side by less than
/// `1e-6` relative.
#[test]
fn certificate_integrals_are_grid_converged() {
    let dom = Domain1D::new(0.0, 1.0).unwrap();
    let coarse = build_grid(dom, 400, default_grading(0.3)).unwrap();
    let fine = build_grid(dom, 800, default_grading(0.3)).unwrap();
    let spec = ProblemSpec {
        domain: dom,
        k: FunctionSpec::Power {
            s: 0.5,
            t: 1.5,
            scale: 2.0,
        },
        m: FunctionSpec::Bump {
            center: 0.45,
            width: 0.2,
            height: 1.3,
        },
        alpha: 0.3,
        gamma: 0.3,
        lambda: 1.0,
        p: 2.0,
    };
    let sp_c = spec.sample(&coarse).unwrap();
    let sp_f = spec.sample(&fine).unwrap();
    let m2_c = suff_m2(&sp_c).unwrap();
    let m2_f = suff_m2(&sp_f).unwrap();
    let hip_c = suff_hip(&sp_c);
    let hip_f = suff_hip(&sp_f);
    for (c, f) in [
        (m2_c.lhs, m2_f.lhs),
        (m2_c.rhs, m2_f.rhs),
        (hip_c.lhs, hip_f.lhs),
        (hip_c.rhs, hip_f.rhs),
    ] {
        assert!(
            (c - f).abs() <= 1e-6 * (1.0 + f.abs()),
            "certificate side moved under refinement: {c} vs {f}"
        );
    }
}
