//! Inverse problems: recovering weights from a prescribed tree point.
//!
//! At a fixed floating point `A0` the equilibrium `Σ Bᵢ u₀ᵢ = 0` is two
//! linear equations in four weights, so fixing the total `c` leaves a line
//! of weights parametrized by `B4` along which the tree point never moves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermat::{locate_4wft, FermatCase, FermatTree, SolverOptions, WeightedQuadrilateral};
use crate::geometry::{angle_at, Point, Quadrilateral};
use crate::scalar::{brent_root, golden_min, linspace};

/// Grid used to bracket solutions of the squared-balance system.
pub const BALANCE_GRID: usize = 2048;

/// Relative margin that keeps the `B4` interval open.
pub const INTERVAL_MARGIN: f64 = 1e-9;

/// Weights below this fraction of the total are treated as vanished when
/// verifying a line.
pub const VANISHING_WEIGHT: f64 = 1e-6;

/// Normalized weights `(B1, B2, B3)` that make a point with angles
/// `(α102, α203, α301)` the weighted Fermat-Torricelli point of the triangle
/// `A1A2A3`: each weight is proportional to the sine of the angle between
/// the other two edges.
pub fn inverse_3wft_ratio(angles: [f64; 3]) -> Result<[f64; 3]> {
    let [a12, a23, a31] = angles;
    if !angles.iter().all(|a| a.is_finite() && *a > 0.0 && *a < std::f64::consts::PI) {
        return Err(Error::InverseUndefined(format!("angles {angles:?} do not describe a strictly interior point")));
    }
    let sum = a12 + a23 + a31;
    if (sum - std::f64::consts::TAU).abs() > 1e-8 {
        return Err(Error::InverseUndefined(format!("angles sum to {sum}, not 2π")));
    }
    let w = [a23.sin(), a31.sin(), a12.sin()];
    let total: f64 = w.iter().sum();
    Ok(w.map(|v| v / total))
}

/// [`inverse_3wft_ratio`] for a point given by coordinates.
pub fn inverse_3wft_ratio_at(tri: [Point; 3], p: Point) -> Result<[f64; 3]> {
    let area2 = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
    let scale = tri[0].distance(tri[1]).max(tri[1].distance(tri[2])).max(tri[2].distance(tri[0]));
    let tol = 1e-12 * scale * scale;
    let inside = (0..3).all(|i| {
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        (b - a).cross(p - a) * area2.signum() > tol
    });
    if area2.abs() <= tol || !inside {
        return Err(Error::InverseUndefined("point is not strictly inside the triangle".into()));
    }
    inverse_3wft_ratio([angle_at(p, tri[0], tri[1]), angle_at(p, tri[1], tri[2]), angle_at(p, tri[2], tri[0])])
}

/// Weights `(wi, wj, wk)` with `wi uᵢ + wj uⱼ + wk u_k = 0`, signed so they are
/// all positive when the three directions positively span the plane in
/// counterclockwise order.
fn balancing_triple(ui: Point, uj: Point, uk: Point) -> [f64; 3] {
    [uj.cross(uk), uk.cross(ui), ui.cross(uj)]
}

/// Weights `Bᵢ = xᵢ·B4 + yᵢ` for `i = 1, 2, 3`, with `Σ Bᵢ = c` for every `B4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasticityLine {
    pub c: f64,
    /// `(xᵢ, yᵢ)` for `B1, B2, B3`.
    pub coeffs: [(f64, f64); 3],
    /// Open interval of `B4` on which all four weights are positive.
    pub b4_interval: (f64, f64),
    /// The tree point held fixed along the line.
    pub point: Point,
}

impl PlasticityLine {
    pub fn weights_at(&self, b4: f64) -> [f64; 4] {
        let [(x1, y1), (x2, y2), (x3, y3)] = self.coeffs;
        [x1 * b4 + y1, x2 * b4 + y2, x3 * b4 + y3, b4]
    }

    pub fn contains(&self, b4: f64) -> bool {
        b4 > self.b4_interval.0 && b4 < self.b4_interval.1
    }
}

fn positive_interval(c: f64, coeffs: &[(f64, f64); 3]) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for &(x, y) in coeffs {
        if x > 0.0 {
            lo = lo.max(-y / x);
        } else if x < 0.0 {
            hi = hi.min(-y / x);
        } else if y <= 0.0 {
            return Err(Error::NoPositiveSolution("a weight is constant and non-positive".into()));
        }
    }
    let margin = INTERVAL_MARGIN * c;
    let (lo, hi) = (lo + margin, hi - margin);
    if !(lo < hi) {
        return Err(Error::NoPositiveSolution(format!("empty B4 interval ({lo}, {hi})")));
    }
    Ok((lo, hi))
}

/// Affine family of weights keeping the floating tree point of `wq` fixed,
/// at the total weight of `wq`.
///
/// Built from the inverse problems on the triangles `A1A2A3`, `A1A3A4` and
/// `A1A2A4`. Requires the point to be off both diagonals; on a diagonal the
/// triangle ratios are undefined and [`plasticity_system_new`] applies.
pub fn plasticity_line(wq: &WeightedQuadrilateral, tree: &FermatTree) -> Result<PlasticityLine> {
    if let FermatCase::AbsorbedAtVertex { vertex, .. } = tree.case {
        return Err(Error::InverseUndefined(format!("tree is absorbed at A{}", vertex + 1)));
    }
    let x = tree.point;
    let v = wq.quad.vertices();
    let u: Vec<Point> = v
        .iter()
        .map(|p| (*p - x).unit())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InverseUndefined("tree point coincides with a vertex".into()))?;
    if u[0].cross(u[2]).abs() <= 1e-9 || u[1].cross(u[3]).abs() <= 1e-9 {
        return Err(Error::DiagonalPoint);
    }
    let c = wq.total_weight();
    let [w1, w2, w3] = balancing_triple(u[0], u[1], u[2]);
    let (r21, r31) = (w2 / w1, w3 / w1);
    let [s1, _, s4] = balancing_triple(u[0], u[2], u[3]);
    let p = s1 / s4;
    let [t1, _, t4] = balancing_triple(u[0], u[1], u[3]);
    let q = t1 / t4;

    let denom = 1.0 + r21 + r31;
    let x1 = (p * r21 + q * r31 - 1.0) / denom;
    let y1 = c / denom;
    let coeffs = [(x1, y1), (r21 * (x1 - p), y1 * r21), (r31 * (x1 - q), y1 * r31)];
    if !coeffs.iter().all(|(a, b)| a.is_finite() && b.is_finite()) {
        return Err(Error::InverseUndefined("degenerate edge directions".into()));
    }
    Ok(PlasticityLine { c, coeffs, b4_interval: positive_interval(c, &coeffs)?, point: x })
}

/// Residuals of the two squared-balance equations
/// `|B1u1 + B4u4|² = |B2u2 + B3u3|²` and `|B1u1 + B2u2|² = |B3u3 + B4u4|²`
/// written with the angles between consecutive edges.
pub fn squared_balance_residuals(angles: &[f64; 4], b: &[f64; 4]) -> [f64; 2] {
    let [a12, a23, a34, a41] = *angles;
    let [b1, b2, b3, b4] = *b;
    [
        b1 * b1 + b4 * b4 + 2.0 * b1 * b4 * a41.cos() - (b2 * b2 + b3 * b3 + 2.0 * b2 * b3 * a23.cos()),
        b1 * b1 + b2 * b2 + 2.0 * b1 * b2 * a12.cos() - (b3 * b3 + b4 * b4 + 2.0 * b3 * b4 * a34.cos()),
    ]
}

/// All positive weight vectors with total `c` and the given `B4` whose
/// squared balances hold at the angles `(α102, α203, α304, α401)`.
///
/// `B1` is eliminated with the total, the first balance is linear in `B3`,
/// and the second balance is then scanned in `B2` on a fixed grid; sign
/// changes are refined by Brent and tangential roots by local minimization
/// of the residual magnitude.
pub fn plasticity_system_new(angles: [f64; 4], c: f64, b4: f64) -> Result<Vec<[f64; 4]>> {
    let sum: f64 = angles.iter().sum();
    if !angles.iter().all(|a| a.is_finite() && *a > 0.0 && *a <= std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!("angles {angles:?} must lie in (0, π]")));
    }
    if (sum - std::f64::consts::TAU).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("angles sum to {sum}, not 2π")));
    }
    if !(c.is_finite() && c > 0.0 && b4.is_finite() && b4 > 0.0 && b4 < c) {
        return Err(Error::InvalidArgument(format!("need 0 < B4 < c, got B4 = {b4}, c = {c}")));
    }
    let [_, a23, _, a41] = angles;
    let branch = |b2: f64| -> Option<([f64; 4], f64)> {
        let s = c - b4 - b2;
        let den = 2.0 * (s + b4 * a41.cos() + b2 * a23.cos());
        if den.abs() <= 1e-12 * c {
            return None;
        }
        let b3 = (s * s + b4 * b4 + 2.0 * s * b4 * a41.cos() - b2 * b2) / den;
        let w = [s - b3, b2, b3, b4];
        Some((w, squared_balance_residuals(&angles, &w)[1]))
    };
    let scaled = |b2: f64| branch(b2).map(|(_, r)| r / (c * c));

    let grid = linspace(0.0, c - b4, BALANCE_GRID + 1);
    let grid = &grid[1..grid.len() - 1];
    let vals: Vec<Option<f64>> = grid.iter().map(|&x| scaled(x)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (Some(f0), Some(f1)) = (vals[i], vals[i + 1]) else { continue };
        if f0 == 0.0 {
            roots.push(grid[i]);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            if let Ok(r) = brent_root(|x| scaled(x).unwrap_or(f64::NAN), grid[i], grid[i + 1], 1e-15 * c, 200) {
                roots.push(r);
            }
        } else if i > 0 {
            // Touching root: |f| has a local minimum near zero without a sign change.
            if let Some(fm) = vals[i - 1] {
                if f0.abs() < fm.abs() && f0.abs() < f1.abs() && f0.signum() == fm.signum() {
                    let (x, fx) =
                        golden_min(|x| scaled(x).map_or(f64::INFINITY, f64::abs), grid[i - 1], grid[i + 1], 1e-14 * c);
                    if fx < 1e-12 {
                        roots.push(x);
                    }
                }
            }
        }
    }

    let mut out: Vec<[f64; 4]> = Vec::new();
    for r in roots {
        let Some((w, _)) = branch(r) else { continue };
        // Reject pole crossings, which change sign without a root.
        let res = squared_balance_residuals(&angles, &w);
        if res.iter().any(|v| v.abs() > 1e-9 * c * c) {
            continue;
        }
        if w.iter().any(|v| *v <= 0.0) {
            continue;
        }
        if !out.iter().any(|o| o.iter().zip(&w).all(|(a, b)| (a - b).abs() <= 1e-7 * c)) {
            out.push(w);
        }
    }
    if out.is_empty() {
        return Err(Error::NoPositiveSolution(format!("no positive weights for c = {c}, B4 = {b4}")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticitySample {
    pub b4: f64,
    pub weights: [f64; 4],
    /// Re-solved tree point; absent for excluded samples.
    pub point: Option<Point>,
    pub deviation: Option<f64>,
    /// Set when a weight is numerically zero or negative at this `B4`.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticityReport {
    pub samples: Vec<PlasticitySample>,
    pub max_deviation: f64,
    pub diameter: f64,
    pub passed: bool,
}

/// Re-solves the four-terminal problem at the given `B4` values and measures
/// how far the tree point drifts from the line's reference point. Passes
/// when every included sample stays within `1e-6·diameter`.
pub fn verify_plasticity_at(
    q: &Quadrilateral,
    line: &PlasticityLine,
    b4s: &[f64],
    opts: &SolverOptions,
) -> Result<PlasticityReport> {
    let diameter = q.diameter();
    let samples: Vec<PlasticitySample> = b4s
        .par_iter()
        .map(|&b4| {
            let weights = line.weights_at(b4);
            let excluded = weights.iter().any(|w| *w <= VANISHING_WEIGHT * line.c);
            if excluded {
                return Ok(PlasticitySample { b4, weights, point: None, deviation: None, excluded });
            }
            let tree = locate_4wft(&WeightedQuadrilateral::new(*q, weights)?, opts)?;
            Ok(PlasticitySample {
                b4,
                weights,
                point: Some(tree.point),
                deviation: Some(tree.point.distance(line.point)),
                excluded,
            })
        })
        .collect::<Result<_>>()?;
    let included: Vec<f64> = samples.iter().filter_map(|s| s.deviation).collect();
    let max_deviation = included.iter().copied().fold(0.0, f64::max);
    let passed = !included.is_empty() && max_deviation < 1e-6 * diameter;
    Ok(PlasticityReport { samples, max_deviation, diameter, passed })
}

/// [`verify_plasticity_at`] on the midpoints of `samples` equal cells of the
/// line's `B4` interval.
pub fn verify_plasticity(
    q: &Quadrilateral,
    line: &PlasticityLine,
    samples: usize,
    opts: &SolverOptions,
) -> Result<PlasticityReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let (lo, hi) = line.b4_interval;
    let b4s: Vec<f64> = (0..samples).map(|k| lo + (k as f64 + 0.5) * (hi - lo) / samples as f64).collect();
    verify_plasticity_at(q, line, &b4s, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    fn rect() -> Quadrilateral {
        Quadrilateral::new([Point::new(0.0, 0.0), Point::new(7.0, 0.0), Point::new(7.0, 4.0), Point::new(0.0, 4.0)])
            .unwrap()
    }

    fn line_for(weights: [f64; 4]) -> (WeightedQuadrilateral, FermatTree, PlasticityLine) {
        let wq = WeightedQuadrilateral::new(rect(), weights).unwrap();
        let tree = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        let line = plasticity_line(&wq, &tree).unwrap();
        (wq, tree, line)
    }

    #[test]
    fn inverse_ratio_examples() {
        let r = inverse_3wft_ratio([TAU / 3.0; 3]).unwrap();
        for v in r {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
        }
        // Right isosceles triangle, incenter: measured angles give the sines directly.
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let r_in = 1.0 - 1.0 / 2f64.sqrt();
        let inc = Point::new(r_in, r_in);
        let a = [angle_at(inc, tri[0], tri[1]), angle_at(inc, tri[1], tri[2]), angle_at(inc, tri[2], tri[0])];
        let s = [a[1].sin(), a[2].sin(), a[0].sin()];
        let total: f64 = s.iter().sum();
        let r = inverse_3wft_ratio_at(tri, inc).unwrap();
        for (v, e) in r.iter().zip(s) {
            assert_abs_diff_eq!(*v, e / total, epsilon = 1e-12);
        }
        assert!(matches!(inverse_3wft_ratio_at(tri, Point::new(0.5, 0.0)), Err(Error::InverseUndefined(_))));
        assert!(inverse_3wft_ratio([PI, PI / 2.0, PI / 2.0]).is_err());
    }

    #[test]
    fn inverse_ratio_round_trips_through_forward_solve() {
        let v = rect().vertices();
        let tri = [v[0], v[1], v[2]];
        let p = Point::new(4.2, 1.3);
        let w = inverse_3wft_ratio_at(tri, p).unwrap();
        let t = crate::fermat::locate_3wft(tri, w, &SolverOptions::default()).unwrap();
        assert!(t.point.distance(p) < 1e-8);
    }

    #[test]
    fn second_example_line() {
        let (_, _, line) = line_for([3.0, 2.5, 1.7, 1.5]);
        let expect = [(-0.8159745, 4.2239621), (1.1070888, 0.8393665), (-1.2911143, 3.6366712)];
        for ((x, y), (ex, ey)) in line.coeffs.iter().zip(expect) {
            assert_abs_diff_eq!(*x, ex, epsilon = 1e-5);
            assert_abs_diff_eq!(*y, ey, epsilon = 1e-5);
        }
        assert_abs_diff_eq!(line.c, 8.7);
        let w = line.weights_at(1.5);
        for (v, e) in w.iter().zip([3.0, 2.5, 1.7, 1.5]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-8);
        }
        let sx: f64 = line.coeffs.iter().map(|c| c.0).sum();
        let sy: f64 = line.coeffs.iter().map(|c| c.1).sum();
        assert_abs_diff_eq!(sx, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sy, 8.7, epsilon = 1e-9);
    }

    #[test]
    fn third_example_line() {
        let (_, _, line) = line_for([3.1, 2.3, 1.7, 1.4]);
        let expect = [(-0.7731178, 4.1823652), (1.2871855, 0.49794), (-1.5140677, 3.8196947)];
        for ((x, y), (ex, ey)) in line.coeffs.iter().zip(expect) {
            assert_abs_diff_eq!(*x, ex, epsilon = 1e-5);
            assert_abs_diff_eq!(*y, ey, epsilon = 1e-5);
        }
    }

    #[test]
    fn line_matches_equilibrium_null_space() {
        // Independent route: solve Σ Bᵢ uᵢ = 0, Σ Bᵢ = c for B1..B3 at fixed B4 by Cramer's rule.
        let (wq, tree, line) = line_for([3.0, 2.5, 1.7, 1.5]);
        let v = wq.quad.vertices();
        let u: Vec<Point> = v.iter().map(|p| (*p - tree.point).unit().unwrap()).collect();
        for b4 in [0.5, 1.2, 2.0] {
            let m = [[u[0].x, u[1].x, u[2].x], [u[0].y, u[1].y, u[2].y], [1.0, 1.0, 1.0]];
            let rhs = [-b4 * u[3].x, -b4 * u[3].y, line.c - b4];
            let det = |m: [[f64; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let d = det(m);
            let w = line.weights_at(b4);
            for col in 0..3 {
                let mut mc = m;
                for row in 0..3 {
                    mc[row][col] = rhs[row];
                }
                assert_abs_diff_eq!(det(mc) / d, w[col], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn diagonal_point_is_rejected() {
        let wq = WeightedQuadrilateral::new(rect(), [2.0, 1.0, 2.0, 1.0]).unwrap();
        let tree = locate_4wft(&wq, &SolverOptions::default()).unwrap();
        assert_eq!(plasticity_line(&wq, &tree), Err(Error::DiagonalPoint));
    }

    fn ex2_angles() -> [f64; 4] {
        let (_, tree, _) = line_for([3.0, 2.5, 1.7, 1.5]);
        tree.angles.unwrap()
    }

    #[test]
    fn squared_balance_system_recovers_table_weights() {
        let angles = ex2_angles();
        let sols = plasticity_system_new(angles, 8.7, 1.5).unwrap();
        assert!(sols.iter().any(|w| w.iter().zip([3.0, 2.5, 1.7, 1.5]).all(|(a, b)| (a - b).abs() < 1e-4)));
        let sols = plasticity_system_new(angles, 8.7, 1.2).unwrap();
        assert!(sols
            .iter()
            .any(|w| w.iter().zip([3.2447927, 2.1678731, 2.0873328, 1.2]).all(|(a, b)| (a - b).abs() < 1e-4)));
        for w in &sols {
            let r = squared_balance_residuals(&angles, w);
            assert!(r.iter().all(|v| v.abs() < 1e-9 * 8.7 * 8.7));
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 8.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn line_weights_satisfy_squared_balances() {
        let (_, tree, line) = line_for([3.0, 2.5, 1.7, 1.5]);
        let angles = tree.angles.unwrap();
        for b4 in [0.3, 1.0, 1.7, 2.5] {
            let w = line.weights_at(b4);
            let r = squared_balance_residuals(&angles, &w);
            assert!(r.iter().all(|v| v.abs() < 1e-7 * 8.7 * 8.7), "{r:?}");
        }
    }

    #[test]
    fn diagonal_angles_force_opposite_weights_equal() {
        let t = 2.0 * (3.5f64 / 2.0).atan();
        let sols = plasticity_system_new([t, PI - t, t, PI - t], 8.7, 1.5).unwrap();
        for w in sols {
            assert!((w[0] - w[2]).abs() < 1e-9 && (w[1] - w[3]).abs() < 1e-9, "{w:?}");
        }
    }

    #[test]
    fn squared_balance_input_validation() {
        assert!(plasticity_system_new([1.0, 1.0, 1.0, 1.0], 8.7, 1.5).is_err());
        assert!(plasticity_system_new([PI / 2.0; 4], 8.7, 9.0).is_err());
    }

    #[test]
    fn verification_holds_on_the_line() {
        let (wq, _, line) = line_for([3.0, 2.5, 1.7, 1.5]);
        let report =
            verify_plasticity_at(&wq.quad, &line, &[1.2, 1.5, 1.7, 1.7728955], &SolverOptions::default()).unwrap();
        assert!(report.passed);
        for s in &report.samples {
            let p = s.point.unwrap();
            assert_abs_diff_eq!(p.x, 2.8274502, epsilon = 1e-5);
            assert_abs_diff_eq!(p.y, 1.2787811, epsilon = 1e-5);
        }
        let edge = verify_plasticity_at(&wq.quad, &line, &[line.b4_interval.1], &SolverOptions::default()).unwrap();
        assert!(edge.samples[0].excluded);
        assert!(!edge.passed);
        let report = verify_plasticity(&wq.quad, &line, 16, &SolverOptions::default()).unwrap();
        assert!(report.passed, "{}", report.max_deviation);
    }
}
