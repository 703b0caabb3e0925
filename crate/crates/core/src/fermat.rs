//! Weighted Fermat-Torricelli points of three and four terminals.
//!
//! The four-terminal point has no closed form, so every solver here is
//! iterative: Weiszfeld's fixed-point map, a damped Newton solve of the
//! circle system on the square, and a damped Newton solve of the angle
//! system on a general convex quadrilateral. Angles of a four-terminal tree
//! are always ordered `(α102, α203, α304, α401)`, the angle at the tree
//! point between consecutive edges.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_at, checked_acos, diagonal_intersection, Point, Quadrilateral};
use crate::newton::{damped_newton, NewtonOptions};

/// Relative tolerance of the vertex absorption test.
pub const ABSORPTION_TOL: f64 = 1e-9;

/// Relative bound on the equilibrium residual accepted for a floating tree.
pub const EQUILIBRIUM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual tolerance for Newton and Weiszfeld iterations.
    pub tol: f64,
    pub newton_max_iter: usize,
    pub weiszfeld_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, newton_max_iter: 200, weiszfeld_max_iter: 10_000 }
    }
}

impl SolverOptions {
    fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.tol, max_iter: self.newton_max_iter }
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    for (i, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::NonPositiveWeight { index: i + 1, value: w });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedQuadrilateral {
    pub quad: Quadrilateral,
    pub weights: [f64; 4],
}

impl WeightedQuadrilateral {
    pub fn new(quad: Quadrilateral, weights: [f64; 4]) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self { quad, weights })
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same instance with weights rescaled to sum to one.
    pub fn normalized(&self) -> Self {
        let c = self.total_weight();
        Self { quad: self.quad, weights: self.weights.map(|w| w / c) }
    }

    /// `Σ Bᵢ ‖X − Aᵢ‖`.
    pub fn objective(&self, x: Point) -> f64 {
        weighted_distance_sum(&self.quad.vertices(), &self.weights, x)
    }
}

pub fn weighted_distance_sum(points: &[Point], weights: &[f64], x: Point) -> f64 {
    points.iter().zip(weights).map(|(p, w)| w * p.distance(x)).sum()
}

/// `Σ Bᵢ u(X→Aᵢ)`, the negated gradient of the objective away from the terminals.
pub fn equilibrium_vector(points: &[Point], weights: &[f64], x: Point) -> Point {
    points
        .iter()
        .zip(weights)
        .filter_map(|(p, w)| (*p - x).unit().map(|u| u * *w))
        .fold(Point::default(), |acc, v| acc + v)
}

/// Pull at terminal `i` from the other terminals, `‖Σ_{j≠i} Bⱼ u(Aᵢ→Aⱼ)‖`.
fn vertex_pull(points: &[Point], weights: &[f64], i: usize) -> f64 {
    let x = points[i];
    points
        .iter()
        .zip(weights)
        .enumerate()
        .filter(|(j, _)| *j != i)
        .filter_map(|(_, (p, w))| (*p - x).unit().map(|u| u * *w))
        .fold(Point::default(), |acc, v| acc + v)
        .norm()
}

/// Index of the first terminal whose weight dominates the pull of the
/// others, together with a flag set when the comparison is within tolerance.
fn absorbing_vertex(points: &[Point], weights: &[f64]) -> Option<(usize, bool)> {
    let tol = ABSORPTION_TOL * weights.iter().sum::<f64>();
    (0..points.len()).find_map(|i| {
        let pull = vertex_pull(points, weights, i);
        (pull <= weights[i] + tol).then_some((i, (pull - weights[i]).abs() <= tol))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FermatCase {
    Floating,
    /// `vertex` is zero-based; `boundary` marks a tie within tolerance.
    AbsorbedAtVertex {
        vertex: usize,
        boundary: bool,
    },
    DiagonalIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    VertexTest,
    DiagonalShortcut,
    Weiszfeld,
    SquareSystem,
    GeneralSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermatTree {
    pub point: Point,
    pub case: FermatCase,
    /// `(α102, α203, α304, α401)`; absent when the tree is absorbed at a vertex.
    pub angles: Option<[f64; 4]>,
    pub objective: f64,
    /// Norm of the minimal subgradient of the objective at `point`.
    pub equilibrium_residual: f64,
    pub iterations: usize,
    pub solver: SolverKind,
}

/// Angles `(α102, α203, α304, α401)` measured at `x`.
pub fn measured_angles(q: &Quadrilateral, x: Point) -> [f64; 4] {
    let v = q.vertices();
    std::array::from_fn(|i| angle_at(x, v[i], v[(i + 1) % 4]))
}

fn tree_at(
    wq: &WeightedQuadrilateral,
    point: Point,
    case: FermatCase,
    angles: Option<[f64; 4]>,
    iterations: usize,
    solver: SolverKind,
) -> FermatTree {
    let vertices = wq.quad.vertices();
    let equilibrium_residual = match case {
        FermatCase::AbsorbedAtVertex { vertex, .. } => {
            (vertex_pull(&vertices, &wq.weights, vertex) - wq.weights[vertex]).max(0.0)
        }
        _ => equilibrium_vector(&vertices, &wq.weights, point).norm(),
    };
    FermatTree { point, case, angles, objective: wq.objective(point), equilibrium_residual, iterations, solver }
}

/// Floating versus absorbed classification by the vertex pull test.
pub fn classify_case(wq: &WeightedQuadrilateral) -> FermatCase {
    match absorbing_vertex(&wq.quad.vertices(), &wq.weights) {
        Some((vertex, boundary)) => FermatCase::AbsorbedAtVertex { vertex, boundary },
        None => FermatCase::Floating,
    }
}

/// Angles `(α_i0j, α_j0k, α_k0i)` at the interior weighted Fermat-Torricelli
/// point of a triangle with weights `(Bi, Bj, Bk)`.
pub fn triangle_wft_angles(bi: f64, bj: f64, bk: f64) -> Result<[f64; 3]> {
    check_weights(&[bi, bj, bk])?;
    let strict = |a: f64, b: f64, c: f64| (a - b).abs() < c && c < a + b;
    if !(strict(bi, bj, bk) && strict(bj, bk, bi) && strict(bk, bi, bj)) {
        return Err(Error::WeightTriangle(bi, bj, bk));
    }
    let ang = |a: f64, b: f64, opp: f64| {
        checked_acos((opp * opp - a * a - b * b) / (2.0 * a * b)).ok_or(Error::WeightTriangle(bi, bj, bk))
    };
    Ok([ang(bi, bj, bk)?, ang(bj, bk, bi)?, ang(bk, bi, bj)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeiszfeldOutcome {
    pub point: Point,
    /// Zero-based terminal index when the minimizer is a terminal.
    pub absorbed: Option<usize>,
    pub iterations: usize,
    pub residual: f64,
}

fn max_spread(points: &[Point]) -> f64 {
    let mut d = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max(p.distance(*q));
        }
    }
    d
}

/// Weiszfeld iteration `A ← Σ(BᵢAᵢ/dᵢ) / Σ(Bᵢ/dᵢ)` for the weighted
/// Fermat-Torricelli point of three or more terminals. Stops once
/// `‖Σ Bᵢ u₀ᵢ‖ < tol·ΣBᵢ`. Terminals that absorb the point are detected
/// up front; an iterate that lands on a terminal triggers a perturbed restart.
pub fn weiszfeld(points: &[Point], weights: &[f64], tol: f64, max_iter: usize) -> Result<WeiszfeldOutcome> {
    if points.len() < 3 || points.len() != weights.len() {
        return Err(Error::InvalidArgument("need at least three terminals with one weight each".into()));
    }
    if !points.iter().all(|p| p.is_finite()) {
        return Err(Error::NonFinite("terminal"));
    }
    check_weights(weights)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let diam = max_spread(points);
    let collinear = {
        let (a, b) = (points[0], points.iter().copied().find(|p| p.distance(points[0]) > 0.0));
        match b {
            None => true,
            Some(b) => points.iter().all(|p| (b - a).cross(*p - a).abs() <= 1e-12 * diam * diam),
        }
    };
    if collinear {
        return Err(Error::InvalidArgument("terminals are collinear".into()));
    }

    let total: f64 = weights.iter().sum();
    if let Some((i, _)) = absorbing_vertex(points, weights) {
        let residual = (vertex_pull(points, weights, i) - weights[i]).max(0.0);
        return Ok(WeiszfeldOutcome { point: points[i], absorbed: Some(i), iterations: 0, residual });
    }

    let centroid = points.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / points.len() as f64);
    let mut x = points.iter().zip(weights).fold(Point::default(), |a, (&p, &w)| a + p * w) * (1.0 / total);
    let mut restarts = 0usize;
    let mut residual = f64::INFINITY;
    for iter in 0..max_iter {
        let near = points.iter().position(|p| p.distance(x) <= 1e-12 * diam);
        if let Some(_k) = near {
            restarts += 1;
            let kick = Point::new(1.0, 0.618_034).rotate(restarts as f64) * (1e-6 * diam);
            x = centroid + kick;
            continue;
        }
        residual = equilibrium_vector(points, weights, x).norm();
        if residual < tol * total {
            return Ok(WeiszfeldOutcome { point: x, absorbed: None, iterations: iter, residual });
        }
        let (mut num, mut den) = (Point::default(), 0.0);
        for (&p, &w) in points.iter().zip(weights) {
            let s = w / p.distance(x);
            num = num + p * s;
            den += s;
        }
        x = num * (1.0 / den);
    }
    Err(Error::NonConvergence { method: "weiszfeld", iterations: max_iter, residual, last: Some(x), trace: Vec::new() })
}

/// Newton refinement of `∇f = 0` from a nearby point, used to polish a
/// Weiszfeld iterate whose residual stalls above the floating tolerance.
fn polish_gradient(points: &[Point], weights: &[f64], x0: Point, opts: &SolverOptions) -> Option<Point> {
    let total: f64 = weights.iter().sum();
    let diam = max_spread(points);
    let out = damped_newton(
        |v: &[f64; 2]| {
            let x = Point::new(v[0], v[1]);
            if points.iter().any(|p| p.distance(x) <= 1e-12 * diam) {
                return None;
            }
            let g = equilibrium_vector(points, weights, x) * (1.0 / total);
            Some([g.x, g.y])
        },
        [x0.x, x0.y],
        NewtonOptions { tol: opts.tol, max_iter: opts.newton_max_iter },
        "gradient polish",
    )
    .ok()?;
    Some(Point::new(out.x[0], out.x[1]))
}

/// Weighted Fermat-Torricelli point of a triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleTree {
    pub point: Point,
    /// Zero-based vertex index when absorbed.
    pub absorbed: Option<usize>,
    /// `(α102, α203, α301)` measured at the point; absent when absorbed.
    pub angles: Option<[f64; 3]>,
    pub objective: f64,
    pub equilibrium_residual: f64,
    pub iterations: usize,
}

pub fn locate_3wft(vertices: [Point; 3], weights: [f64; 3], opts: &SolverOptions) -> Result<TriangleTree> {
    let out = weiszfeld(&vertices, &weights, opts.tol, opts.weiszfeld_max_iter).or_else(|err| match err {
        Error::NonConvergence { last: Some(x), .. } => polish_gradient(&vertices, &weights, x, opts)
            .map(|point| WeiszfeldOutcome {
                point,
                absorbed: None,
                iterations: opts.weiszfeld_max_iter,
                residual: equilibrium_vector(&vertices, &weights, point).norm(),
            })
            .ok_or(err),
        other => Err(other),
    })?;
    let angles = out
        .absorbed
        .is_none()
        .then(|| std::array::from_fn(|i| angle_at(out.point, vertices[i], vertices[(i + 1) % 3])));
    Ok(TriangleTree {
        point: out.point,
        absorbed: out.absorbed,
        angles,
        objective: weighted_distance_sum(&vertices, &weights, out.point),
        equilibrium_residual: out.residual,
        iterations: out.iterations,
    })
}

fn is_square(q: &Quadrilateral) -> Option<f64> {
    let v = q.vertices();
    let a = v[1].x;
    let expect = [Point::new(0.0, 0.0), Point::new(a, 0.0), Point::new(a, a), Point::new(0.0, a)];
    (a > 0.0 && v.iter().zip(&expect).all(|(p, e)| p.distance(*e) <= 1e-12 * a)).then_some(a)
}

fn cot(t: f64) -> f64 {
    t.cos() / t.sin()
}

fn in_open_pi(t: f64) -> bool {
    t > 0.0 && t < PI
}

/// `α304` from the squared balance of the pairs `{1,2}` and `{3,4}`.
fn square_opposite_angle(b: &[f64; 4], a102: f64) -> Option<f64> {
    let [b1, b2, b3, b4] = *b;
    let arg = (b1 * b1 + 2.0 * b1 * b2 * a102.cos() + b2 * b2 - b3 * b3 - b4 * b4) / (2.0 * b3 * b4);
    (arg.abs() <= 1.0).then(|| arg.acos())
}

fn square_residual(b: &[f64; 4], v: &[f64; 2]) -> Option<[f64; 2]> {
    let [a, q] = *v;
    let [b1, b2, b3, b4] = *b;
    if !(in_open_pi(a) && in_open_pi(q)) {
        return None;
    }
    let c = square_opposite_angle(b, a)?;
    if a + q + c >= TAU || !in_open_pi(TAU - a - q - c) {
        return None;
    }
    let total = b1 + b2 + b3 + b4;
    // Three-circle concurrency with the vanishing trigonometric prefactors divided out.
    let circles = (a - c).cos() - (a + c + 2.0 * q).cos() - 2.0 * (a + c).sin();
    let balance = (-b1 * b1 - 2.0 * b1 * b2 * a.cos() - b2 * b2 + b3 * b3
        - 2.0 * b1 * b4 * q.cos()
        - 2.0 * b2 * b4 * (a + q).cos()
        - b4 * b4)
        / (total * total);
    Some([circles, balance])
}

fn square_point(side: f64, a102: f64, a304: f64, a401: f64) -> Point {
    let (cp, cr, cq) = (cot(a102), cot(a304), cot(a401));
    let x = side * (cp - 1.0) * (cr - 1.0) / ((cp + cr - 2.0) * (cq - 1.0));
    let y = -(side - side * cr) / (cp + cr - 2.0);
    Point::new(x, y)
}

fn solve_square_side(
    side: f64,
    weights: &[f64; 4],
    init: [f64; 2],
    opts: &SolverOptions,
) -> Result<(Point, [f64; 4], usize)> {
    let out = damped_newton(|v| square_residual(weights, v), init, opts.newton(), "square circle system")?;
    let [a102, a401] = out.x;
    let a304 = square_opposite_angle(weights, a102)
        .ok_or_else(|| Error::InconsistentCase("opposite angle left its domain".into()))?;
    let a203 = TAU - a102 - a304 - a401;
    Ok((square_point(side, a102, a304, a401), [a102, a203, a304, a401], out.iterations))
}

fn accept_floating(wq: &WeightedQuadrilateral, point: Point) -> Result<f64> {
    if !point.is_finite() {
        return Err(Error::InconsistentCase("reconstructed point is not finite".into()));
    }
    if wq.quad.inset(point) <= 0.0 {
        return Err(Error::InconsistentCase(format!(
            "solution ({}, {}) lies outside the quadrilateral interior",
            point.x, point.y
        )));
    }
    let residual = equilibrium_vector(&wq.quad.vertices(), &wq.weights, point).norm();
    if residual >= EQUILIBRIUM_TOL * wq.total_weight() {
        return Err(Error::InconsistentCase(format!("equilibrium residual {residual:e} at the reconstructed point")));
    }
    Ok(residual)
}

/// Floating tree on the square `(0,0), (a,0), (a,a), (0,a)` from the
/// three-circle system in `(α102, α401)`.
///
/// The seed decides which side of the diagonal `A1A3` the solve targets;
/// if that branch fails the mirrored branch (swap of `A2` and `A4`) is tried
/// with the seed mirrored accordingly.
pub fn solve_4wft_square(side: f64, weights: [f64; 4], init: [f64; 2], opts: &SolverOptions) -> Result<FermatTree> {
    let quad = Quadrilateral::square(side)?;
    let wq = WeightedQuadrilateral::new(quad, weights)?;
    if let FermatCase::AbsorbedAtVertex { vertex, .. } = classify_case(&wq) {
        return Err(Error::InconsistentCase(format!("the tree is absorbed at A{}", vertex + 1)));
    }
    let direct = solve_square_side(side, &weights, init, opts)
        .and_then(|(p, angles, it)| accept_floating(&wq, p).map(|_| (p, angles, it)));
    let (point, angles, iterations) = match direct {
        Ok(found) => found,
        Err(first) => {
            let [b1, b2, b3, b4] = weights;
            let mirrored = solve_square_side(side, &[b1, b4, b3, b2], [init[1], init[0]], opts)
                .map(|(p, [m102, m203, m304, m401], it)| (Point::new(p.y, p.x), [m401, m304, m203, m102], it))
                .and_then(|(p, angles, it)| accept_floating(&wq, p).map(|_| (p, angles, it)));
            mirrored.map_err(|_| first)?
        }
    };
    Ok(tree_at(&wq, point, FermatCase::Floating, Some(angles), iterations, SolverKind::SquareSystem))
}

/// Unknowns of the general angle system, `(α102, α401, α304, α013)`, where
/// `α013` is the angle at `A1` between the edge to the tree point and the
/// diagonal `A1A3`.
pub type GeneralSeed = [f64; 4];

struct GeneralSystem {
    weights: [f64; 4],
    a213: f64,
    a314: f64,
    a13: f64,
    a12: f64,
    a14: f64,
}

impl GeneralSystem {
    fn new(quad: &Quadrilateral, weights: [f64; 4]) -> Self {
        let [v1, v2, v3, v4] = quad.vertices();
        Self {
            weights,
            a213: angle_at(v1, v2, v3),
            a314: angle_at(v1, v3, v4),
            a13: v1.distance(v3),
            a12: v1.distance(v2),
            a14: v1.distance(v4),
        }
    }

    fn residual(&self, v: &[f64; 4]) -> Option<[f64; 4]> {
        let [p, q, r, t] = *v;
        let a203 = TAU - p - q - r;
        if !(in_open_pi(p) && in_open_pi(q) && in_open_pi(r) && in_open_pi(a203)) {
            return None;
        }
        if !(t > 0.0 && t < self.a213) {
            return None;
        }
        let [b1, b2, b3, b4] = self.weights;
        let total = b1 + b2 + b3 + b4;
        let s = r + q;
        let (ss, cs) = s.sin_cos();
        let (st, ct) = t.sin_cos();
        let k2 = self.a13 / self.a12;
        let k4 = self.a13 / self.a14;

        // Both sine-law relations for cot α013 with the poles of cot multiplied out.
        let d2 = (k2 * p.sin() - (self.a213 + p).sin()) * ss;
        let n2 = -(self.a213 + p).cos() * ss - k2 * p.sin() * cs;
        let d4 = ((self.a314 + q).sin() - k4 * q.sin()) * ss;
        let n4 = -(self.a314 + q).cos() * ss + k4 * q.sin() * cs;
        let side2 = (ct * d2 - st * n2) / (1.0 + k2);
        let side4 = (ct * d4 - st * n4) / (1.0 + k4);

        let squared = (b3 * b3
            - (b1 * b1
                + b2 * b2
                + b4 * b4
                + 2.0 * b2 * b4 * (q + p).cos()
                + 2.0 * b1 * b2 * p.cos()
                + 2.0 * b1 * b4 * q.cos()))
            / (total * total);
        let direction = (cs * (b4 * q.sin() - b2 * p.sin()) - ss * (b1 + b2 * p.cos() + b4 * q.cos())) / total;
        Some([side2, side4, squared, direction])
    }

    fn point(&self, quad: &Quadrilateral, v: &[f64; 4]) -> Point {
        let [_, q, _, t] = *v;
        let [v1, _, v3, _] = quad.vertices();
        let a01 = self.a14 * (t + self.a314 + q).sin() / q.sin();
        let axis = (v3 - v1) * (1.0 / self.a13);
        v1 + axis.rotate(-t) * a01
    }
}

/// Solves the system on the branch where the tree point lies on the `A2`
/// side of the diagonal `A1A3`. Returns the point, the angles and the
/// iteration count.
fn solve_general_branch(
    quad: &Quadrilateral,
    weights: [f64; 4],
    seed: GeneralSeed,
    opts: &SolverOptions,
) -> Result<(Point, [f64; 4], usize)> {
    let sys = GeneralSystem::new(quad, weights);
    let out = damped_newton(|v| sys.residual(v), seed, opts.newton(), "quadrilateral angle system")?;
    let [p, q, r, _] = out.x;
    Ok((sys.point(quad, &out.x), [p, TAU - p - q - r, r, q], out.iterations))
}

fn mirror_seed(seed: GeneralSeed) -> GeneralSeed {
    let [p, q, r, t] = seed;
    [q, p, TAU - p - q - r, t]
}

fn solve_general_mirrored(
    wq: &WeightedQuadrilateral,
    seed: GeneralSeed,
    opts: &SolverOptions,
) -> Result<(Point, [f64; 4], usize)> {
    let [b1, b2, b3, b4] = wq.weights;
    let (p, [m102, m203, m304, m401], it) =
        solve_general_branch(&wq.quad.mirrored(), [b1, b4, b3, b2], mirror_seed(seed), opts)?;
    Ok((p.mirrored(), [m401, m304, m203, m102], it))
}

/// Seed for the general system measured at an approximate tree point.
pub fn general_seed_at(q: &Quadrilateral, x: Point) -> GeneralSeed {
    let [a102, _, a304, a401] = measured_angles(q, x);
    let [v1, _, v3, _] = q.vertices();
    [a102, a401, a304, angle_at(v1, x, v3)]
}

fn weiszfeld_point(wq: &WeightedQuadrilateral, opts: &SolverOptions) -> Result<WeiszfeldOutcome> {
    weiszfeld(&wq.quad.vertices(), &wq.weights, opts.tol, opts.weiszfeld_max_iter).or_else(|err| match err {
        Error::NonConvergence { last: Some(x), residual, iterations, .. } => {
            Ok(WeiszfeldOutcome { point: x, absorbed: None, iterations, residual })
        }
        other => Err(other),
    })
}

/// Runs the angle system on the given branches and keeps the accepted
/// candidate with the smallest equilibrium residual.
fn solve_general_branches(
    wq: &WeightedQuadrilateral,
    seed: GeneralSeed,
    mirrored: &[bool],
    opts: &SolverOptions,
) -> Result<FermatTree> {
    let mut best: Option<FermatTree> = None;
    let mut first_err = None;
    for &m in mirrored {
        let attempt = if m {
            solve_general_mirrored(wq, seed, opts)
        } else {
            solve_general_branch(&wq.quad, wq.weights, seed, opts)
        }
        .and_then(|(p, angles, it)| {
            accept_floating(wq, p)?;
            Ok(tree_at(wq, p, FermatCase::Floating, Some(angles), it, SolverKind::GeneralSystem))
        });
        match attempt {
            Ok(t) => {
                if best.as_ref().map_or(true, |b| t.equilibrium_residual < b.equilibrium_residual) {
                    best = Some(t);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or_else(|| Error::InconsistentCase("no branch converged".into())))
}

/// Branches to try for an approximate tree point: the side of `A1A3` it
/// lies on, or both when it is numerically on the diagonal.
fn branches_near(q: &Quadrilateral, x: Point) -> &'static [bool] {
    let v = q.vertices();
    let side = (v[2] - v[0]).cross(x - v[0]);
    let scale = q.diameter();
    if side.abs() <= 1e-9 * scale * scale {
        &[false, true]
    } else if side > 0.0 {
        &[true]
    } else {
        &[false]
    }
}

/// Floating tree on a general convex quadrilateral from the angle system in
/// `(α102, α401, α304, α013)`.
///
/// Without a seed the system is seeded from Weiszfeld and solved on the side
/// of `A1A3` the Weiszfeld point falls on. With an explicit seed both sides
/// are attempted and the candidate with the smaller equilibrium residual is kept.
pub fn solve_4wft_general(
    wq: &WeightedQuadrilateral,
    init: Option<GeneralSeed>,
    opts: &SolverOptions,
) -> Result<FermatTree> {
    if let FermatCase::AbsorbedAtVertex { vertex, .. } = classify_case(wq) {
        return Err(Error::InconsistentCase(format!("the tree is absorbed at A{}", vertex + 1)));
    }
    match init {
        Some(seed) => solve_general_branches(wq, seed, &[false, true], opts),
        None => {
            let w = weiszfeld_point(wq, opts)?;
            solve_general_branches(wq, general_seed_at(&wq.quad, w.point), branches_near(&wq.quad, w.point), opts)
        }
    }
}

/// Weighted Fermat-Torricelli tree of a quadrilateral: vertex test first,
/// the diagonal intersection when opposite weights agree, otherwise the
/// angle system seeded from Weiszfeld with Weiszfeld as the fallback.
pub fn locate_4wft(wq: &WeightedQuadrilateral, opts: &SolverOptions) -> Result<FermatTree> {
    let vertices = wq.quad.vertices();
    if let case @ FermatCase::AbsorbedAtVertex { vertex, .. } = classify_case(wq) {
        return Ok(tree_at(wq, vertices[vertex], case, None, 0, SolverKind::VertexTest));
    }
    let [b1, b2, b3, b4] = wq.weights;
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.max(b);
    if same(b1, b3) && same(b2, b4) {
        let point = diagonal_intersection(&wq.quad);
        let angles = measured_angles(&wq.quad, point);
        return Ok(tree_at(wq, point, FermatCase::DiagonalIntersection, Some(angles), 0, SolverKind::DiagonalShortcut));
    }

    let w = weiszfeld_point(wq, opts)?;
    let seed = general_seed_at(&wq.quad, w.point);
    if let Ok(tree) = solve_general_branches(wq, seed, branches_near(&wq.quad, w.point), opts) {
        return Ok(tree);
    }

    let weiszfeld_tree = |p: Point| {
        tree_at(wq, p, FermatCase::Floating, Some(measured_angles(&wq.quad, p)), w.iterations, SolverKind::Weiszfeld)
    };
    let tree = weiszfeld_tree(w.point);
    if tree.equilibrium_residual < EQUILIBRIUM_TOL * wq.total_weight() {
        return Ok(tree);
    }
    match polish_gradient(&vertices, &wq.weights, w.point, opts) {
        Some(p) => Ok(weiszfeld_tree(p)),
        None => Err(Error::NonConvergence {
            method: "weiszfeld",
            iterations: w.iterations,
            residual: tree.equilibrium_residual,
            last: Some(w.point),
            trace: Vec::new(),
        }),
    }
}

/// Locates the tree with the solver a caller asked for: the square system
/// for a two-angle seed on the canonical square, the general system for a
/// four-angle seed, and [`locate_4wft`] otherwise.
pub fn locate_with_seed(wq: &WeightedQuadrilateral, seed: Option<&[f64]>, opts: &SolverOptions) -> Result<FermatTree> {
    match seed {
        None => locate_4wft(wq, opts),
        Some(&[a, b]) => {
            let side = is_square(&wq.quad).ok_or_else(|| {
                Error::InvalidArgument("a two-angle seed requires the square (0,0), (a,0), (a,a), (0,a)".into())
            })?;
            solve_4wft_square(side, wq.weights, [a, b], opts)
        }
        Some(&[a, b, c, d]) => solve_4wft_general(wq, Some([a, b, c, d]), opts),
        Some(other) => Err(Error::InvalidArgument(format!("seed must have two or four angles, got {}", other.len()))),
    }
}
