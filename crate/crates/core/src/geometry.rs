//! Planar primitives: points, convex quadrilaterals, cosine-law angles and
//! the Cayley-Menger machinery that ties the six pairwise distances of four
//! coplanar points together.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix5;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on an arccos argument before a triangle is declared infeasible.
pub const ARCCOS_CLAMP_TOL: f64 = 1e-9;

/// Relative tolerance of the strict convexity test (scaled by the squared size).
pub const CONVEXITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn unit(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Reflection across the x-axis.
    pub fn mirrored(self) -> Self {
        Self::new(self.x, -self.y)
    }

    /// Polar angle in `(-π, π]`.
    pub fn heading(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(radius * c, radius * s)
    }
}

impl Add for Point {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Unsigned angle in `[0, π]` between two vectors.
pub fn angle_between(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v))
}

/// Angle `∠A vertex B` in `[0, π]`.
pub fn angle_at(vertex: Point, a: Point, b: Point) -> f64 {
    angle_between(a - vertex, b - vertex)
}

/// Clamped arccos: arguments within [`ARCCOS_CLAMP_TOL`] outside `[-1, 1]`
/// are snapped to the boundary, anything further out is `None`.
pub(crate) fn checked_acos(arg: f64) -> Option<f64> {
    if !arg.is_finite() || arg.abs() > 1.0 + ARCCOS_CLAMP_TOL {
        None
    } else {
        Some(arg.clamp(-1.0, 1.0).acos())
    }
}

/// Cosine-law angle between sides `a` and `b`, i.e. the angle opposite `c`.
pub fn triangle_angle(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && c >= 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InfeasibleTriangle { a, b, c });
    }
    checked_acos((a * a + b * b - c * c) / (2.0 * a * b)).ok_or(Error::InfeasibleTriangle { a, b, c })
}

/// Four vertices `A1..A4` of a strictly convex quadrilateral, listed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Point; 4]", into = "[Point; 4]")]
pub struct Quadrilateral {
    vertices: [Point; 4],
}

impl TryFrom<[Point; 4]> for Quadrilateral {
    type Error = Error;
    fn try_from(vertices: [Point; 4]) -> Result<Self> {
        Self::new(vertices)
    }
}

impl From<Quadrilateral> for [Point; 4] {
    fn from(q: Quadrilateral) -> Self {
        q.vertices
    }
}

impl Quadrilateral {
    pub fn new(vertices: [Point; 4]) -> Result<Self> {
        if !vertices.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("quadrilateral vertex"));
        }
        let scale = max_pairwise_distance(&vertices);
        for i in 0..4 {
            for j in i + 1..4 {
                if vertices[i].distance(vertices[j]) <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::CoincidentVertices(i + 1, j + 1));
                }
            }
        }
        let tol = CONVEXITY_TOL * scale * scale;
        for i in 0..4 {
            let prev = vertices[(i + 3) % 4];
            let cur = vertices[i];
            let next = vertices[(i + 1) % 4];
            let cross = (cur - prev).cross(next - cur);
            if cross <= tol {
                return Err(Error::NotConvex { vertex: i + 1, cross });
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned square `(0,0), (a,0), (a,a), (0,a)`.
    pub fn square(side: f64) -> Result<Self> {
        Self::new([Point::new(0.0, 0.0), Point::new(side, 0.0), Point::new(side, side), Point::new(0.0, side)])
    }

    /// Rebuilds a quadrilateral from the five lengths `a12, a23, a34, a41` and
    /// the diagonal `a13`, with `A1` at the origin and `A2` on the positive x-axis.
    pub fn from_lengths(a12: f64, a23: f64, a34: f64, a41: f64, a13: f64) -> Result<Self> {
        let a1 = Point::new(0.0, 0.0);
        let a2 = Point::new(a12, 0.0);
        // A3 above the x-axis, A4 on the far side of A1A3 from A2.
        let theta3 = triangle_angle(a12, a13, a23)?;
        let a3 = Point::from_polar(a13, theta3);
        let theta4 = theta3 + triangle_angle(a13, a41, a34)?;
        let a4 = Point::from_polar(a41, theta4);
        Self::new([a1, a2, a3, a4])
    }

    pub fn vertices(&self) -> [Point; 4] {
        self.vertices
    }

    /// Vertex by zero-based index (`0` is `A1`).
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn diameter(&self) -> f64 {
        max_pairwise_distance(&self.vertices)
    }

    pub fn distances(&self) -> DistanceSet {
        DistanceSet::from_points(&self.vertices)
    }

    /// Applies `f` to every vertex and revalidates.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Self> {
        Self::new(self.vertices.map(f))
    }

    /// The relabelled mirror image `(A1, A4, A3, A2)` reflected across the
    /// x-axis, which is again counterclockwise.
    pub(crate) fn mirrored(&self) -> Self {
        let [a1, a2, a3, a4] = self.vertices;
        Self { vertices: [a1.mirrored(), a4.mirrored(), a3.mirrored(), a2.mirrored()] }
    }

    /// Signed distance of `p` from the nearest edge line, positive inside.
    pub fn inset(&self, p: Point) -> f64 {
        (0..4)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % 4];
                (b - a).cross(p - a) / a.distance(b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed containment with an absolute slack `tol`.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.inset(p) >= -tol
    }

    pub fn centroid(&self) -> Point {
        self.vertices.iter().fold(Point::default(), |acc, &p| acc + p) * 0.25
    }
}

fn max_pairwise_distance(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            best = best.max(p.distance(q));
        }
    }
    best
}

/// Intersection of the diagonals `A1A3` and `A2A4`.
pub fn diagonal_intersection(q: &Quadrilateral) -> Point {
    let [a1, a2, a3, a4] = q.vertices();
    let d1 = a3 - a1;
    let d2 = a4 - a2;
    // Convexity guarantees the diagonals cross, so the denominator is nonzero.
    let t = (a2 - a1).cross(d2) / d1.cross(d2);
    a1 + d1 * t
}

/// The six pairwise distances between four points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSet {
    pub a12: f64,
    pub a13: f64,
    pub a14: f64,
    pub a23: f64,
    pub a24: f64,
    pub a34: f64,
}

impl DistanceSet {
    pub fn from_points(p: &[Point; 4]) -> Self {
        Self {
            a12: p[0].distance(p[1]),
            a13: p[0].distance(p[2]),
            a14: p[0].distance(p[3]),
            a23: p[1].distance(p[2]),
            a24: p[1].distance(p[3]),
            a34: p[2].distance(p[3]),
        }
    }

    /// Builds a distance set and checks that it belongs to four coplanar
    /// points: positivity, strict triangle inequalities on all four faces
    /// and a vanishing Cayley-Menger determinant.
    pub fn planar(a12: f64, a13: f64, a14: f64, a23: f64, a24: f64, a34: f64) -> Result<Self> {
        let d = Self { a12, a13, a14, a23, a24, a34 };
        let all = d.as_array();
        if !all.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InconsistentDistances("distances must be positive and finite".into()));
        }
        for (a, b, c) in [(a12, a23, a13), (a13, a34, a14), (a12, a24, a14), (a23, a34, a24)] {
            if !(a + b > c && b + c > a && a + c > b) {
                return Err(Error::InfeasibleTriangle { a, b, c });
            }
        }
        let scale = all.iter().copied().fold(0.0, f64::max);
        let cm = cayley_menger(&d);
        if cm.abs() > 1e-9 * scale.powi(6) {
            return Err(Error::InconsistentDistances(format!("Cayley-Menger determinant {cm:e} is not zero")));
        }
        Ok(d)
    }

    fn as_array(&self) -> [f64; 6] {
        [self.a12, self.a13, self.a14, self.a23, self.a24, self.a34]
    }
}

/// Bordered Cayley-Menger determinant of the six distances; equals `288 V²`
/// for the tetrahedron they span, so zero for coplanar points.
pub fn cayley_menger(d: &DistanceSet) -> f64 {
    cayley_menger_matrix(d).determinant()
}

fn cayley_menger_matrix(d: &DistanceSet) -> Matrix5<f64> {
    let s = |v: f64| v * v;
    Matrix5::new(
        0.0,
        s(d.a12),
        s(d.a13),
        s(d.a14),
        1.0,
        s(d.a12),
        0.0,
        s(d.a23),
        s(d.a24),
        1.0,
        s(d.a13),
        s(d.a23),
        0.0,
        s(d.a34),
        1.0,
        s(d.a14),
        s(d.a24),
        s(d.a34),
        0.0,
        1.0,
        1.0,
        1.0,
        1.0,
        1.0,
        0.0,
    )
}

/// Solves the planarity condition for the diagonal `a13` given the other
/// five distances.
///
/// The determinant is quadratic in `a13²`. Roots whose embedding is a
/// strictly convex counterclockwise quadrilateral are returned first, larger
/// first; if no root is convex every positive root is returned (this covers
/// degenerate inputs such as a collinear `A2, A1, A4`). Repeated roots are
/// reported once.
pub fn resolve_planar_diagonal(a12: f64, a14: f64, a23: f64, a34: f64, a24: f64) -> Result<Vec<f64>> {
    let inputs = [a12, a14, a23, a34, a24];
    if !inputs.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::InconsistentDistances("distances must be positive and finite".into()));
    }
    let scale = inputs.iter().copied().fold(0.0, f64::max);
    let s2 = scale * scale;
    let eval = |x: f64| {
        let mut m = cayley_menger_matrix(&DistanceSet { a12, a13: 0.0, a14, a23, a24, a34 });
        m[(0, 2)] = x;
        m[(2, 0)] = x;
        m.determinant()
    };
    // Exact quadratic through three samples.
    let c0 = eval(0.0);
    let fp = eval(s2);
    let fm = eval(-s2);
    let qa = (fp + fm - 2.0 * c0) / (2.0 * s2 * s2);
    let qb = (fp - fm) / (2.0 * s2);
    let qc = c0;

    let mut squares = Vec::new();
    if qa.abs() <= 1e-14 * (qb.abs() / s2 + qc.abs() / (s2 * s2)) {
        if qb != 0.0 {
            squares.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        let disc_tol = 1e-10 * qb * qb;
        if disc < -disc_tol {
            return Err(Error::InconsistentDistances("no real root for the diagonal".into()));
        }
        let root = disc.max(0.0).sqrt();
        // Stable quadratic formula.
        let q = -0.5 * (qb + qb.signum() * root);
        if q == 0.0 {
            squares.push(0.0);
        } else {
            squares.push(q / qa);
            squares.push(qc / q);
        }
    }

    let mut roots: Vec<f64> = squares.into_iter().filter(|x| *x > 0.0 && x.is_finite()).map(f64::sqrt).collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
    if roots.is_empty() {
        return Err(Error::InconsistentDistances("no positive root for the diagonal".into()));
    }

    let convex: Vec<f64> = roots.iter().copied().filter(|&a13| embeds_convex(a12, a14, a23, a34, a24, a13)).collect();
    Ok(if convex.is_empty() { roots } else { convex })
}

fn embeds_convex(a12: f64, a14: f64, a23: f64, a34: f64, a24: f64, a13: f64) -> bool {
    let Ok(q) = Quadrilateral::from_lengths(a12, a23, a34, a14, a13) else {
        return false;
    };
    let d = q.distances();
    (d.a24 - a24).abs() <= 1e-7 * a24.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn rect() -> Quadrilateral {
        Quadrilateral::new([Point::new(0.0, 0.0), Point::new(7.0, 0.0), Point::new(7.0, 4.0), Point::new(0.0, 4.0)])
            .unwrap()
    }

    #[test]
    fn cosine_law_examples() {
        let r65 = 65f64.sqrt();
        assert_abs_diff_eq!(triangle_angle(7.0, 4.0, r65).unwrap(), PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(triangle_angle(1.0, 1.0, 1.0).unwrap(), PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(triangle_angle(7.0, r65, 4.0).unwrap(), (4.0f64 / 7.0).atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(triangle_angle(7.0, r65, 4.0).unwrap(), 0.519146, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_triangles_clamp_and_infeasible_ones_fail() {
        assert_eq!(triangle_angle(1.0, 2.0, 3.0).unwrap(), PI);
        assert_eq!(triangle_angle(1.0, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(triangle_angle(1.0, 2.0, 1.0 - 1e-12).unwrap(), 0.0);
        assert!(matches!(triangle_angle(1.0, 1.0, 3.0), Err(Error::InfeasibleTriangle { .. })));
        assert!(triangle_angle(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn diagonal_intersection_examples() {
        let c = diagonal_intersection(&rect());
        assert_abs_diff_eq!(c.x, 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.y, 2.0, epsilon = 1e-12);
        let c = diagonal_intersection(&Quadrilateral::square(1.0).unwrap());
        assert_abs_diff_eq!(c.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.y, 0.5, epsilon = 1e-12);

        // Oracle: solve A1 + t(A3 - A1) = A2 + s(A4 - A2) by Cramer's rule.
        // A1=(0,0), A3=(5,3), A2=(4,0), A4=(1,2):
        // 5t + 3s = 4, 3t - 2s = 0  =>  t = 8/19, s = 12/19.
        let q = Quadrilateral::new([
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(5.0, 3.0),
            Point::new(1.0, 2.0),
        ])
        .unwrap();
        let c = diagonal_intersection(&q);
        assert_abs_diff_eq!(c.x, 40.0 / 19.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.y, 24.0 / 19.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonconvex_clockwise_and_coincident() {
        let cw = [Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0)];
        assert!(matches!(Quadrilateral::new(cw), Err(Error::NotConvex { .. })));
        let dart = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.5, 0.5), Point::new(0.0, 2.0)];
        assert!(matches!(Quadrilateral::new(dart), Err(Error::NotConvex { .. })));
        let flat = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 1.0)];
        assert!(Quadrilateral::new(flat).is_err());
        let dup = [Point::new(0.0, 0.0), Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert!(matches!(Quadrilateral::new(dup), Err(Error::CoincidentVertices(1, 2))));
        let nan = [Point::new(f64::NAN, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert!(matches!(Quadrilateral::new(nan), Err(Error::NonFinite(_))));
    }

    #[test]
    fn cayley_menger_values() {
        let tet = DistanceSet { a12: 1.0, a13: 1.0, a14: 1.0, a23: 1.0, a24: 1.0, a34: 1.0 };
        // V = 1/(6√2) for the unit regular tetrahedron, so 288 V² = 4.
        assert_abs_diff_eq!(cayley_menger(&tet), 4.0, epsilon = 1e-12);

        let d = rect().distances();
        assert_abs_diff_eq!(d.a13, 65f64.sqrt(), epsilon = 1e-12);
        assert!(cayley_menger(&d).abs() < 1e-9 * 8f64.powi(4));

        let mut bumped = d;
        bumped.a23 *= 2.0;
        assert!(cayley_menger(&bumped).abs() > 1.0);
    }

    #[test]
    fn planar_distance_set_validation() {
        let d = rect().distances();
        assert!(DistanceSet::planar(d.a12, d.a13, d.a14, d.a23, d.a24, d.a34).is_ok());
        assert!(DistanceSet::planar(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(DistanceSet::planar(d.a12, d.a13, d.a14, d.a23, -1.0, d.a34).is_err());
    }

    #[test]
    fn resolve_diagonal_of_rectangle() {
        let roots = resolve_planar_diagonal(7.0, 4.0, 4.0, 7.0, 65f64.sqrt()).unwrap();
        assert_abs_diff_eq!(roots[0], 65f64.sqrt(), epsilon = 1e-9);
    }

    fn circle_intersections(c0: Point, r0: f64, c1: Point, r1: f64) -> Vec<Point> {
        let d = c0.distance(c1);
        let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
        let h2 = r0 * r0 - a * a;
        if h2 < -1e-12 {
            return vec![];
        }
        let h = h2.max(0.0).sqrt();
        let e = (c1 - c0) * (1.0 / d);
        let base = c0 + e * a;
        let n = Point::new(-e.y, e.x);
        vec![base + n * h, base - n * h]
    }

    #[test]
    fn resolve_diagonal_collinear_triple_gives_single_root() {
        // a24 = a12 + a14 puts A2, A1, A4 on one line; both mirror images of A3
        // give the same a13.
        let roots = resolve_planar_diagonal(3.0, 2.0, 3.0, 4.0, 5.0).unwrap();
        assert_eq!(roots.len(), 1);
        let cands = circle_intersections(Point::new(-3.0, 0.0), 3.0, Point::new(2.0, 0.0), 4.0);
        for c in cands {
            assert_abs_diff_eq!(roots[0], c.norm(), epsilon = 1e-7);
        }
    }

    #[test]
    fn resolve_diagonal_matches_embedding() {
        let (a12, a14, a23, a34, a24) = (5.0, 3.0, 4.0, 6.0, 7.0);
        let roots = resolve_planar_diagonal(a12, a14, a23, a34, a24).unwrap();
        let a2 = Point::new(a12, 0.0);
        let a4 = circle_intersections(Point::default(), a14, a2, a24)[0];
        let measured: Vec<f64> = circle_intersections(a2, a23, a4, a34).into_iter().map(|p| p.norm()).collect();
        assert!(!roots.is_empty());
        for r in &roots {
            assert!(measured.iter().any(|m| (m - r).abs() < 1e-9 * 7.0), "{r} vs {measured:?}");
        }
    }

    #[test]
    fn from_lengths_round_trips() {
        let q = Quadrilateral::from_lengths(7.0, 4.0, 7.0, 4.0, 65f64.sqrt()).unwrap();
        let d = q.distances();
        assert_abs_diff_eq!(d.a24, 65f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(q.vertex(2).x, 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.vertex(3).y, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn mirrored_quadrilateral_is_valid() {
        let q = Quadrilateral::new([
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(5.0, 3.0),
            Point::new(1.0, 2.0),
        ])
        .unwrap();
        let m = q.mirrored();
        assert!(Quadrilateral::new(m.vertices()).is_ok());
    }
}
