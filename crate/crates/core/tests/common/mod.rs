#![allow(dead_code)]

use rand::Rng;
use wft_core::fermat::{classify_case, FermatCase, WeightedQuadrilateral};
use wft_core::{Point, Quadrilateral};

pub fn rect() -> Quadrilateral {
    Quadrilateral::new([Point::new(0.0, 0.0), Point::new(7.0, 0.0), Point::new(7.0, 4.0), Point::new(0.0, 4.0)])
        .unwrap()
}

/// Random strictly convex quadrilateral with vertices on a jittered circle.
pub fn random_quad(rng: &mut impl Rng) -> Quadrilateral {
    loop {
        let mut th: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        th.sort_by(f64::total_cmp);
        let v: [Point; 4] = std::array::from_fn(|i| {
            let r = rng.gen_range(0.5..1.5) * 5.0;
            Point::from_polar(r, th[i]) + Point::new(3.0, -1.0)
        });
        let ok = (0..4).all(|i| {
            let (a, b, c) = (v[i], v[(i + 1) % 4], v[(i + 2) % 4]);
            (b - a).cross(c - b) > 0.05 * 25.0
        });
        if ok {
            if let Ok(q) = Quadrilateral::new(v) {
                return q;
            }
        }
    }
}

/// Random floating weighted quadrilateral.
pub fn random_floating(rng: &mut impl Rng) -> WeightedQuadrilateral {
    loop {
        let q = random_quad(rng);
        let w: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.5..2.0));
        let wq = WeightedQuadrilateral::new(q, w).unwrap();
        if classify_case(&wq) == FermatCase::Floating {
            return wq;
        }
    }
}

/// Brute-force minimizer of `Σ Bᵢ‖X − Aᵢ‖`: an `n × n` grid over the
/// bounding box followed by a shrinking compass search.
pub fn brute_force_point(wq: &WeightedQuadrilateral, n: usize) -> Point {
    let v = wq.quad.vertices();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in v {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let mut best = (f64::INFINITY, Point::default());
    for i in 0..=n {
        for j in 0..=n {
            let p = Point::new(xmin + (xmax - xmin) * i as f64 / n as f64, ymin + (ymax - ymin) * j as f64 / n as f64);
            let f = wq.objective(p);
            if f < best.0 {
                best = (f, p);
            }
        }
    }
    let mut p = best.1;
    let mut fp = best.0;
    let mut h = (xmax - xmin).max(ymax - ymin) / n as f64;
    let dirs: Vec<Point> = (0..16).map(|k| Point::from_polar(1.0, k as f64 * std::f64::consts::TAU / 16.0)).collect();
    while h > 1e-13 {
        let mut moved = false;
        for d in &dirs {
            let c = p + *d * h;
            let fc = wq.objective(c);
            if fc < fp {
                p = c;
                fp = fc;
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    p
}
