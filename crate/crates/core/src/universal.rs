//! Absorbing values of the Gauss variable along a plasticity line, their
//! minimum `u_FT`, and the steady/evolutionary tree mechanics built on it.
//!
//! For fixed terminal weights the span of the Gauss tree shrinks as `x_G`
//! grows and vanishes at the absorbing value, where the degree-three tree
//! collapses onto the degree-four tree. The signed Gauss objective has
//! derivative `l` in `x_G`, so the same value is its maximizer; both routes
//! are computed and must agree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{orientation, signed_objective, solve_gauss_tree, tree_span, xg_bounds, GaussTree, GaussWeights};
use crate::geometry::Quadrilateral;
use crate::plasticity::PlasticityLine;
use crate::scalar::{brent_root, golden_max, golden_min, linspace};

/// Span at which the absorbing root is taken.
pub const DEFAULT_EPSILON: f64 = 1e-7;

/// Allowed disagreement between the span root and the objective maximizer.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

/// Default number of `B4` samples for the universal minimum.
pub const DEFAULT_GRID: usize = 64;

const XG_SCAN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalSample {
    pub b4: f64,
    /// `(B1, B2, B3, B4)` on the line at `b4`.
    pub weights: [f64; 4],
    /// Root of `l(x_G) = ε`.
    pub xg_absorbing: f64,
    /// Maximizer of the Gauss objective over `x_G`, the cross-check.
    pub xg_maximizer: f64,
    /// Gauss objective at the absorbing value.
    pub objective: f64,
}

/// Absorbing value of the Gauss variable for the weights at `b4` on `line`.
pub fn absorbing_xg(q: &Quadrilateral, line: &PlasticityLine, b4: f64, epsilon: f64) -> Result<UniversalSample> {
    if !line.contains(b4) {
        return Err(Error::InfeasibleB4 {
            b4,
            reason: format!("outside the positive interval ({}, {})", line.b4_interval.0, line.b4_interval.1),
        });
    }
    let weights = line.weights_at(b4);
    let (lo, hi) = xg_bounds(&weights);
    let pad = 1e-9 * line.c;
    let (lo, hi) = (lo + pad, hi - pad);
    if !(lo < hi) {
        return Err(Error::InfeasibleB4 { b4, reason: "empty Gauss-variable interval".into() });
    }
    let span = |x: f64| tree_span(q, &GaussWeights::new(weights, x)).map_or(f64::NAN, |l| l - epsilon);

    let xs = linspace(lo, hi, XG_SCAN);
    let vals: Vec<f64> = xs.iter().map(|&x| span(x)).collect();
    let cell = (0..xs.len() - 1).find(|&i| vals[i] > 0.0 && vals[i + 1] <= 0.0).ok_or_else(|| Error::InfeasibleB4 {
        b4,
        reason: "the span does not cross zero on the feasible Gauss-variable interval".into(),
    })?;
    let root = if vals[cell + 1] == 0.0 {
        xs[cell + 1]
    } else {
        brent_root(span, xs[cell], xs[cell + 1], 1e-14 * line.c, 200)?
    };

    let objective = |x: f64| signed_objective(q, &GaussWeights::new(weights, x)).unwrap_or(f64::NEG_INFINITY);
    let (a, b) = (xs[cell.saturating_sub(1)], xs[(cell + 2).min(xs.len() - 1)]);
    let (maximizer, _) = golden_max(objective, a, b, 1e-10 * line.c);
    if (maximizer - root).abs() >= CROSS_CHECK_TOL {
        return Err(Error::CrossCheckMismatch { root, maximizer });
    }
    Ok(UniversalSample { b4, weights, xg_absorbing: root, xg_maximizer: maximizer, objective: objective(root) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedSample {
    pub b4: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalSet {
    /// Feasible samples sorted by `B4`.
    pub samples: Vec<UniversalSample>,
    pub omitted: Vec<OmittedSample>,
}

/// Absorbing values at the given `B4` values, evaluated in parallel.
pub fn universal_set_at(q: &Quadrilateral, line: &PlasticityLine, b4s: &[f64], epsilon: f64) -> UniversalSet {
    let results: Vec<(f64, Result<UniversalSample>)> =
        b4s.par_iter().map(|&b4| (b4, absorbing_xg(q, line, b4, epsilon))).collect();
    let mut samples = Vec::new();
    let mut omitted = Vec::new();
    for (b4, r) in results {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => omitted.push(OmittedSample { b4, reason: e.to_string() }),
        }
    }
    samples.sort_by(|a, b| a.b4.total_cmp(&b.b4));
    omitted.sort_by(|a, b| a.b4.total_cmp(&b.b4));
    UniversalSet { samples, omitted }
}

/// Absorbing values on `grid` evenly spaced `B4` values spanning the line's
/// interval; a grid of one is its midpoint.
pub fn universal_set(q: &Quadrilateral, line: &PlasticityLine, grid: usize, epsilon: f64) -> Result<UniversalSet> {
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must have at least one point".into()));
    }
    let (lo, hi) = line.b4_interval;
    Ok(universal_set_at(q, line, &linspace(lo, hi, grid), epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalResult {
    /// Minimum absorbing value over the line.
    pub u_ft: f64,
    pub b4_star: f64,
    /// `u_FT / c`.
    pub rate: f64,
    pub samples: Vec<UniversalSample>,
    pub omitted: Vec<OmittedSample>,
    /// Set when the sampled profile has more than one local minimum.
    pub multimodal: bool,
}

fn local_minima(samples: &[UniversalSample]) -> usize {
    let v: Vec<f64> = samples.iter().map(|s| s.xg_absorbing).collect();
    (0..v.len())
        .filter(|&i| {
            let left = i == 0 || v[i] < v[i - 1];
            let right = i + 1 == v.len() || v[i] < v[i + 1];
            left && right
        })
        .count()
}

/// Minimum of the absorbing value over the line: best of `grid` samples,
/// refined by golden section on the neighbouring cells.
pub fn universal_minimum(
    q: &Quadrilateral,
    line: &PlasticityLine,
    grid: usize,
    epsilon: f64,
    tol: f64,
) -> Result<UniversalResult> {
    if grid < 2 {
        return Err(Error::InvalidArgument("the minimum needs a grid of at least two points".into()));
    }
    let set = universal_set(q, line, grid, epsilon)?;
    let best = set
        .samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.xg_absorbing.total_cmp(&b.1.xg_absorbing))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NoPositiveSolution("no feasible B4 sample on the line".into()))?;
    let n = set.samples.len();
    let a = if best == 0 { line.b4_interval.0 } else { set.samples[best - 1].b4 };
    let b = if best + 1 == n { line.b4_interval.1 } else { set.samples[best + 1].b4 };
    let eval = |b4: f64| absorbing_xg(q, line, b4, epsilon).map_or(f64::INFINITY, |s| s.xg_absorbing);
    let (b4_star, refined) = golden_min(eval, a, b, tol.max(1e-12));
    let (b4_star, u_ft) = if refined <= set.samples[best].xg_absorbing {
        (b4_star, refined)
    } else {
        (set.samples[best].b4, set.samples[best].xg_absorbing)
    };
    Ok(UniversalResult {
        u_ft,
        b4_star,
        rate: u_ft / line.c,
        multimodal: local_minima(&set.samples) > 1,
        samples: set.samples,
        omitted: set.omitted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    Steady,
    Evolutionary,
}

/// Steady below the universal minimum, evolutionary at or above it.
pub fn classify_tree(storage: f64, u_ft: f64) -> Result<TreeKind> {
    if !(storage.is_finite() && storage >= 0.0) {
        return Err(Error::InvalidArgument(format!("storage must be non-negative, got {storage}")));
    }
    Ok(if storage < u_ft { TreeKind::Steady } else { TreeKind::Evolutionary })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeState {
    pub storage: f64,
    /// Absorbing rate spent to sprout the degree-three tree.
    pub a_g: f64,
    pub kind: TreeKind,
}

impl TreeState {
    pub fn new(storage: f64, a_g: f64, u_ft: f64) -> Result<Self> {
        let kind = classify_tree(storage, u_ft)?;
        if !(a_g.is_finite() && a_g >= 0.0) {
            return Err(Error::InvalidArgument(format!("spent rate must be non-negative, got {a_g}")));
        }
        if a_g > 0.0 && (kind == TreeKind::Steady || a_g >= u_ft) {
            return Err(Error::InvalidArgument(format!(
                "a steady tree cannot spend, and an evolutionary one spends less than u_FT = {u_ft}"
            )));
        }
        Ok(Self { storage, a_g, kind })
    }
}

fn same_level(u: f64, u_ft: f64) -> bool {
    (u - u_ft).abs() <= 1e-9 * u_ft.max(1.0)
}

/// `B4` values on the line whose absorbing value equals the storage `u`.
///
/// Sign changes of `x_G(B4) − u` are bracketed on the sampled profile of
/// `result` (refined with the minimizer) and solved by Brent; every crossing
/// is reported.
pub fn weights_for_storage(
    q: &Quadrilateral,
    line: &PlasticityLine,
    result: &UniversalResult,
    u: f64,
    epsilon: f64,
) -> Result<Vec<f64>> {
    if !u.is_finite() || u < result.u_ft && !same_level(u, result.u_ft) {
        return Err(Error::BelowMinimum { storage: u, minimum: result.u_ft });
    }
    if same_level(u, result.u_ft) {
        return Ok(vec![result.b4_star]);
    }
    let mut nodes: Vec<(f64, f64)> = result.samples.iter().map(|s| (s.b4, s.xg_absorbing)).collect();
    nodes.push((result.b4_star, result.u_ft));
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes.dedup_by(|a, b| a.0 == b.0);

    let level = |b4: f64| absorbing_xg(q, line, b4, epsilon).map_or(f64::NAN, |s| s.xg_absorbing - u);
    let mut roots = Vec::new();
    for w in nodes.windows(2) {
        let ((b0, x0), (b1, x1)) = (w[0], w[1]);
        let (f0, f1) = (x0 - u, x1 - u);
        if f0 == 0.0 {
            roots.push(b0);
        } else if f0.signum() != f1.signum() {
            roots.push(brent_root(level, b0, b1, 1e-13 * line.c, 200)?);
        }
    }
    if let Some(&(b, x)) = nodes.last() {
        if x == u {
            roots.push(b);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * line.c);
    if roots.is_empty() {
        return Err(Error::NoPositiveSolution(format!("no B4 on the line has absorbing value {u}")));
    }
    Ok(roots)
}

/// Degree-three tree sprouted by an evolutionary tree with the given
/// storage after spending `a_g`, at the line weights for `b4`. A spend of
/// zero returns the degree-four limit, both nodes at the line's point.
pub fn evolve(
    q: &Quadrilateral,
    line: &PlasticityLine,
    result: &UniversalResult,
    storage: f64,
    a_g: f64,
    b4: f64,
    epsilon: f64,
) -> Result<GaussTree> {
    let state = TreeState::new(storage, a_g, result.u_ft)?;
    if state.kind == TreeKind::Steady {
        return Err(Error::InvalidArgument(format!(
            "storage {storage} is below u_FT = {}; a steady tree does not evolve",
            result.u_ft
        )));
    }
    let sample = absorbing_xg(q, line, b4, epsilon)?;
    if (sample.xg_absorbing - storage).abs() > CROSS_CHECK_TOL * storage.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "B4 = {b4} has absorbing value {}, not the storage {storage}",
            sample.xg_absorbing
        )));
    }
    let weights = sample.weights;
    let xg = storage - a_g;
    let bound = xg_bounds(&weights).0;
    if xg <= bound {
        return Err(Error::OverSpend { spend: a_g, xg, bound });
    }
    let w = GaussWeights::new(weights, xg);
    if a_g == 0.0 {
        let p = line.point;
        let v = q.vertices();
        let [b1, b2, b3, b4w] = weights;
        let a = v.map(|vi| vi.distance(p));
        return Ok(GaussTree {
            node0: p,
            node0p: p,
            a1: a[0],
            a2: a[1],
            a3: a[2],
            a4: a[3],
            l: 0.0,
            phi: orientation(q, &w)?,
            objective: b1 * a[0] + b2 * a[1] + b3 * a[2] + b4w * a[3],
        });
    }
    solve_gauss_tree(q, &w)
}
