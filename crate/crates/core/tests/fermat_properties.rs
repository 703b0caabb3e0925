mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::f64::consts::{PI, TAU};
use wft_core::fermat::{equilibrium_vector, locate_4wft, solve_4wft_general, weiszfeld, FermatCase};
use wft_core::plasticity::squared_balance_residuals;
use wft_core::{Point, SolverOptions, WeightedQuadrilateral};

fn floating_strategy() -> impl Strategy<Value = WeightedQuadrilateral> {
    any::<u64>().prop_map(|seed| common::random_floating(&mut StdRng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floating_solution_is_in_equilibrium(wq in floating_strategy()) {
        let t = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        prop_assert_eq!(t.case, FermatCase::Floating);
        prop_assert!(t.equilibrium_residual < 1e-7 * wq.total_weight());
        let angles = t.angles.unwrap();
        prop_assert!((angles.iter().sum::<f64>() - TAU).abs() < 1e-8);
        let recomputed = wq.objective(t.point);
        prop_assert!((t.objective - recomputed).abs() <= 1e-10 * recomputed);
    }

    #[test]
    fn squared_balances_hold_at_returned_angles(wq in floating_strategy()) {
        let t = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        let angles = t.angles.unwrap();
        let [b1, b2, b3, b4] = wq.weights;
        let [a12, _, _, a41] = angles;
        let scale = wq.total_weight().powi(2);
        // |B1u1 + B2u2 + B4u4|² = B3².
        let three = b1 * b1 + b2 * b2 + b4 * b4 + 2.0 * b1 * b2 * a12.cos() + 2.0 * b1 * b4 * a41.cos()
            + 2.0 * b2 * b4 * (a12 + a41).cos() - b3 * b3;
        prop_assert!(three.abs() < 1e-8 * scale);
        for r in squared_balance_residuals(&angles, &wq.weights) {
            prop_assert!(r.abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn general_system_agrees_with_weiszfeld(wq in floating_strategy()) {
        let g = solve_4wft_general(&wq, None, &SolverOptions::default()).unwrap();
        let w = weiszfeld(&wq.quad.vertices(), &wq.weights, 1e-13, 1_000_000).unwrap();
        prop_assert!(g.point.distance(w.point) < 1e-6 * wq.quad.diameter());
    }

    #[test]
    fn rigid_motion_and_scaling_equivariance(wq in floating_strategy(), angle in -PI..PI, tx in -10.0..10.0f64, ty in -10.0..10.0f64, s in 0.2..5.0f64) {
        let opts = SolverOptions::default();
        let base = locate_4wft(&wq, &opts).unwrap();
        let t = |p: Point| p.rotate(angle) + Point::new(tx, ty);
        let moved = WeightedQuadrilateral::new(wq.quad.map(t).unwrap(), wq.weights).unwrap();
        let m = locate_4wft(&moved, &opts).unwrap();
        prop_assert!(m.point.distance(t(base.point)) < 1e-9 * wq.quad.diameter());

        let scaled = WeightedQuadrilateral::new(wq.quad.map(|p| p * s).unwrap(), wq.weights).unwrap();
        let sc = locate_4wft(&scaled, &opts).unwrap();
        prop_assert!(sc.point.distance(base.point * s) < 1e-9 * wq.quad.diameter() * s);
        for (a, b) in sc.angles.unwrap().iter().zip(base.angles.unwrap()) {
            prop_assert!((a - b).abs() < 1e-10 * 100.0);
        }
    }

    #[test]
    fn weight_scaling_leaves_location(wq in floating_strategy(), lambda in 0.1..10.0f64) {
        let opts = SolverOptions::default();
        let base = locate_4wft(&wq, &opts).unwrap();
        let heavy = WeightedQuadrilateral::new(wq.quad, wq.weights.map(|w| w * lambda)).unwrap();
        let h = locate_4wft(&heavy, &opts).unwrap();
        prop_assert!(h.point.distance(base.point) < 1e-9 * wq.quad.diameter());
        prop_assert!((h.objective - lambda * base.objective).abs() < 1e-9 * h.objective);
    }
}

#[test]
fn objective_is_below_every_grid_point() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..5 {
        let wq = common::random_floating(&mut rng);
        let t = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        let v = wq.quad.vertices();
        let xs = v.iter().map(|p| p.x);
        let ys = v.iter().map(|p| p.y);
        let (x0, x1) = (xs.clone().fold(f64::MAX, f64::min), xs.fold(f64::MIN, f64::max));
        let (y0, y1) = (ys.clone().fold(f64::MAX, f64::min), ys.fold(f64::MIN, f64::max));
        for i in 0..=200 {
            for j in 0..=200 {
                let p = Point::new(x0 + (x1 - x0) * i as f64 / 200.0, y0 + (y1 - y0) * j as f64 / 200.0);
                if wq.quad.contains(p, 0.0) {
                    assert!(t.objective <= wq.objective(p) + 1e-12 * t.objective);
                }
            }
        }
    }
}

#[test]
fn locate_matches_brute_force_minimizer() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..10 {
        let wq = common::random_floating(&mut rng);
        let t = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        let p = common::brute_force_point(&wq, 200);
        assert!(t.point.distance(p) < 1e-4 * wq.quad.diameter());
        assert!(t.objective <= wq.objective(p) + 1e-4);
    }
}

#[test]
fn absorbed_instances_stay_at_their_vertex() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let q = common::random_quad(&mut rng);
        let mut w = [1.0; 4];
        w[2] = 50.0;
        let wq = WeightedQuadrilateral::new(q, w).unwrap();
        let t = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        assert!(matches!(t.case, FermatCase::AbsorbedAtVertex { vertex: 2, .. }));
        assert_eq!(t.point, q.vertex(2));
        let g = equilibrium_vector(&q.vertices(), &w, t.point);
        // The absorbed vertex's own term is excluded; what remains is the pull it resists.
        assert!(g.norm() <= w[2]);
    }
}
