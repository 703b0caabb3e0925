mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wft_core::fermat::{equilibrium_vector, locate_4wft};
use wft_core::gauss::{solve_gauss_tree, tree_span, xg_bounds};
use wft_core::plasticity::{plasticity_line, plasticity_system_new, squared_balance_residuals, verify_plasticity};
use wft_core::universal::{absorbing_xg, evolve, universal_minimum, weights_for_storage, DEFAULT_EPSILON};
use wft_core::{Error, GaussWeights, PlasticityLine, SolverOptions, WeightedQuadrilateral};

fn random_line(rng: &mut StdRng) -> (WeightedQuadrilateral, PlasticityLine) {
    loop {
        let wq = common::random_floating(rng);
        let tree = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        if let Ok(line) = plasticity_line(&wq, &tree) {
            return (wq, line);
        }
    }
}

#[test]
fn line_passes_through_the_input_weights_at_fixed_total() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..100 {
        let (wq, line) = random_line(&mut rng);
        let at = line.weights_at(wq.weights[3]);
        for (a, b) in at.iter().zip(wq.weights) {
            assert!((a - b).abs() < 1e-9 * line.c);
        }
        for _ in 0..10 {
            let b4 = rng.gen_range(line.b4_interval.0..line.b4_interval.1);
            let w = line.weights_at(b4);
            assert!((w.iter().sum::<f64>() - line.c).abs() < 1e-12 * line.c);
            assert!(w.iter().all(|x| *x > 0.0));
            let g = equilibrium_vector(&wq.quad.vertices(), &w, line.point);
            assert!(g.norm() < 1e-8 * line.c);
        }
    }
}

#[test]
fn resolved_point_is_invariant_along_the_line() {
    let mut rng = StdRng::seed_from_u64(32);
    let opts = SolverOptions::default();
    for _ in 0..10 {
        let (wq, line) = random_line(&mut rng);
        let report = verify_plasticity(&wq.quad, &line, 16, &opts).unwrap();
        assert!(report.passed, "max deviation {}", report.max_deviation);
    }
}

#[test]
fn squared_balance_solutions_contain_the_line() {
    let mut rng = StdRng::seed_from_u64(33);
    let opts = SolverOptions::default();
    for _ in 0..20 {
        let (wq, line) = random_line(&mut rng);
        let angles = locate_4wft(&wq, &opts).unwrap().angles.unwrap();
        let (lo, hi) = line.b4_interval;
        let b4 = lo + 0.37 * (hi - lo);
        let want = line.weights_at(b4);
        let found = plasticity_system_new(angles, line.c, b4).unwrap();
        for s in &found {
            for r in squared_balance_residuals(&angles, s) {
                assert!(r.abs() < 1e-8 * line.c * line.c);
            }
        }
        let hit = found.iter().any(|s| s.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-6 * line.c));
        assert!(hit, "{found:?} misses {want:?}");
    }
}

#[test]
fn absorbing_value_closes_the_tree_at_the_fixed_point() {
    let mut rng = StdRng::seed_from_u64(34);
    let mut checked = 0;
    while checked < 10 {
        let (wq, line) = random_line(&mut rng);
        let (lo, hi) = line.b4_interval;
        let Ok(s) = absorbing_xg(&wq.quad, &line, 0.5 * (lo + hi), DEFAULT_EPSILON) else {
            continue;
        };
        let (xlo, xhi) = xg_bounds(&s.weights);
        assert!(xlo < s.xg_absorbing && s.xg_absorbing < xhi);
        assert!((s.xg_absorbing - s.xg_maximizer).abs() < 1e-4);
        let l = tree_span(&wq.quad, &GaussWeights::new(s.weights, s.xg_absorbing)).unwrap();
        assert!((l - DEFAULT_EPSILON).abs() < 1e-9);
        let t = solve_gauss_tree(&wq.quad, &GaussWeights::new(s.weights, s.xg_absorbing)).unwrap();
        assert!(t.node0.distance(line.point) < 1e-5 * wq.quad.diameter());
        checked += 1;
    }
}

#[test]
fn minimum_bounds_every_sample_and_level_sets_hit_it() {
    let mut rng = StdRng::seed_from_u64(35);
    let (mut checked, mut sprouted) = (0, 0);
    while checked < 4 {
        let (wq, line) = random_line(&mut rng);
        let Ok(res) = universal_minimum(&wq.quad, &line, 32, DEFAULT_EPSILON, 1e-10) else {
            continue;
        };
        assert!(res.samples.iter().all(|s| s.xg_absorbing >= res.u_ft - 1e-12));
        assert!((res.rate - res.u_ft / line.c).abs() < 1e-15);
        assert!(matches!(
            weights_for_storage(&wq.quad, &line, &res, 0.9 * res.u_ft, DEFAULT_EPSILON),
            Err(Error::BelowMinimum { .. })
        ));
        let top = res.samples.iter().map(|s| s.xg_absorbing).fold(f64::MIN, f64::max);
        let u = res.u_ft + 0.5 * (top - res.u_ft);
        if u > res.u_ft * (1.0 + 1e-6) {
            for b4 in weights_for_storage(&wq.quad, &line, &res, u, DEFAULT_EPSILON).unwrap() {
                let s = absorbing_xg(&wq.quad, &line, b4, DEFAULT_EPSILON).unwrap();
                assert!((s.xg_absorbing - u).abs() < 1e-8 * line.c);
                // Spending shrinks the interior edge away from zero.
                let lim = evolve(&wq.quad, &line, &res, u, 0.0, b4, DEFAULT_EPSILON).unwrap();
                assert_eq!(lim.l, 0.0);
                let spend = 0.25 * (u - xg_bounds(&s.weights).0).min(res.u_ft);
                if spend > 0.0 && spend < res.u_ft {
                    if let Ok(t) = evolve(&wq.quad, &line, &res, u, spend, b4, DEFAULT_EPSILON) {
                        assert!(t.l > 0.0);
                        sprouted += 1;
                    }
                }
            }
        }
        checked += 1;
    }
    assert!(sprouted > 0);
}
