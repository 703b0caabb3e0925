//! Generalized Gauss trees: full weighted Steiner trees of degree three on a
//! convex quadrilateral with topology `{A1, A4} - A0 - A0′ - {A2, A3}`.
//!
//! The interior edge `A0A0′` carries the Gauss variable `x_G` as its weight.
//! Given the weights, the angles at both nodes follow from the cosine law of
//! the weight triangles, and the tree position has an explicit form in the
//! orientation angle `φ` between `A1A2` and `A0A0′`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermat::check_weights;
use crate::geometry::{angle_at, checked_acos, Point, Quadrilateral};

/// Spans in `(-SPAN_CLAMP, 0]` are reported as the degree-four limit `l = 0`.
pub const SPAN_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussWeights {
    /// Terminal weights `B1..B4`.
    pub b: [f64; 4],
    /// Weight of the interior edge.
    pub xg: f64,
}

impl GaussWeights {
    pub fn new(b: [f64; 4], xg: f64) -> Self {
        Self { b, xg }
    }

    pub fn total(&self) -> f64 {
        self.b.iter().sum()
    }
}

/// Open interval of `x_G` for which both weight triangles are strict.
pub fn xg_bounds(b: &[f64; 4]) -> (f64, f64) {
    let [b1, b2, b3, b4] = *b;
    ((b1 - b4).abs().max((b2 - b3).abs()), (b1 + b4).min(b2 + b3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussValidation {
    pub feasible: bool,
    pub violations: Vec<String>,
}

/// Checks the strict weight-triangle inequalities of `(B1, B4, x_G)` and `(B2, B3, x_G)`.
pub fn validate_gauss_weights(w: &GaussWeights) -> GaussValidation {
    let mut violations = Vec::new();
    for (i, &v) in w.b.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            violations.push(format!("B{} = {v} is not positive", i + 1));
        }
    }
    if !(w.xg.is_finite() && w.xg > 0.0) {
        violations.push(format!("x_G = {} is not positive", w.xg));
    }
    if violations.is_empty() {
        let [b1, b2, b3, b4] = w.b;
        for (name, p, q) in [("B1, B4", b1, b4), ("B2, B3", b2, b3)] {
            if !((p - q).abs() < w.xg) {
                violations.push(format!("x_G = {} ≤ |{name} difference| = {}", w.xg, (p - q).abs()));
            }
            if !(w.xg < p + q) {
                violations.push(format!("x_G = {} ≥ {name} sum = {}", w.xg, p + q));
            }
        }
    }
    GaussValidation { feasible: violations.is_empty(), violations }
}

/// Angles at the two Steiner nodes fixed by the weights alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalAngles {
    /// `∠A1 A0 A0′`
    pub a1_0_0p: f64,
    /// `∠A0′ A0 A4`
    pub a0p_0_4: f64,
    /// `∠A1 A0 A4`
    pub a1_0_4: f64,
    /// `∠A0 A0′ A3`
    pub a0_0p_3: f64,
    /// `∠A0 A0′ A2`
    pub a0_0p_2: f64,
    /// `∠A2 A0′ A3`
    pub a2_0p_3: f64,
}

fn require_feasible(w: &GaussWeights) -> Result<()> {
    check_weights(&w.b)?;
    let v = validate_gauss_weights(w);
    if v.feasible {
        Ok(())
    } else {
        Err(Error::InfeasibleGaussWeights(v.violations.join("; ")))
    }
}

pub fn local_angles(w: &GaussWeights) -> Result<LocalAngles> {
    require_feasible(w)?;
    let [b1, b2, b3, b4] = w.b;
    let x = w.xg;
    // Angle between the edges carrying weights `p` and `q`, opposite weight `opp`.
    let ang = |p: f64, q: f64, opp: f64| {
        checked_acos((opp * opp - p * p - q * q) / (2.0 * p * q))
            .ok_or_else(|| Error::InfeasibleGaussWeights(format!("weights ({p}, {q}, {opp})")))
    };
    Ok(LocalAngles {
        a1_0_0p: ang(b1, x, b4)?,
        a0p_0_4: ang(b4, x, b1)?,
        a1_0_4: ang(b1, b4, x)?,
        a0_0p_3: ang(b3, x, b2)?,
        a0_0p_2: ang(b2, x, b3)?,
        a2_0p_3: ang(b2, b3, x)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussTree {
    /// Steiner node joined to `A1` and `A4`.
    pub node0: Point,
    /// Steiner node joined to `A2` and `A3`.
    pub node0p: Point,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    /// Length of the interior edge.
    pub l: f64,
    /// Angle from `A1A2` to `A0A0′`.
    pub phi: f64,
    pub objective: f64,
}

/// Tree geometry before any sign or containment checks; `l` is signed.
#[derive(Debug, Clone, Copy)]
struct RawTree {
    node0: Point,
    node0p: Point,
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    l: f64,
    phi: f64,
}

fn raw_tree(q: &Quadrilateral, w: &GaussWeights) -> Result<RawTree> {
    let ang = local_angles(w)?;
    let [v1, v2, v3, v4] = q.vertices();
    let [_, _, b3, b4] = w.b;
    let a12 = v1.distance(v2);
    let a14 = v1.distance(v4);
    let a23 = v2.distance(v3);
    let a214 = angle_at(v1, v2, v4);
    let a123 = angle_at(v2, v1, v3);

    let num = w.xg * a12 + b4 * a14 * (a214 - ang.a0p_0_4).cos() + b3 * a23 * (a123 - ang.a0_0p_3).cos();
    let den = b4 * a14 * (a214 - ang.a0p_0_4).sin() - b3 * a23 * (a123 - ang.a0_0p_3).sin();
    let phi = den.atan2(num);

    let a1 = a14 * (a214 - phi - ang.a0p_0_4).sin() / (ang.a1_0_0p + ang.a0p_0_4).sin();
    let a2 = a23 * (a123 + phi - ang.a0_0p_3).sin() / (ang.a0_0p_2 + ang.a0_0p_3).sin();
    let l = a1 * ang.a1_0_0p.cos() + a2 * ang.a0_0p_2.cos() + a12 * phi.cos();

    let axis = Point::from_polar(1.0, (v2 - v1).heading() + phi);
    let node0 = v1 - axis.rotate(-ang.a1_0_0p) * a1;
    let node0p = v2 - (-axis).rotate(ang.a0_0p_2) * a2;
    Ok(RawTree { node0, node0p, a1, a2, a3: v3.distance(node0p), a4: v4.distance(node0), l, phi })
}

/// Signed span `l(x_G)`; positive for a proper degree-three tree, zero at
/// the absorbing value and negative beyond it.
pub fn tree_span(q: &Quadrilateral, w: &GaussWeights) -> Result<f64> {
    Ok(raw_tree(q, w)?.l)
}

/// Orientation angle `φ` of the interior edge for the given weights.
pub(crate) fn orientation(q: &Quadrilateral, w: &GaussWeights) -> Result<f64> {
    Ok(raw_tree(q, w)?.phi)
}

/// Objective with the signed span; continuous through the absorbing value,
/// where it is maximal in `x_G`.
pub(crate) fn signed_objective(q: &Quadrilateral, w: &GaussWeights) -> Result<f64> {
    let t = raw_tree(q, w)?;
    let [b1, b2, b3, b4] = w.b;
    Ok(b1 * t.a1 + b2 * t.a2 + b3 * t.a3 + b4 * t.a4 + w.xg * t.l)
}

pub fn gauss_objective(tree: &GaussTree, w: &GaussWeights) -> f64 {
    let [b1, b2, b3, b4] = w.b;
    b1 * tree.a1 + b2 * tree.a2 + b3 * tree.a3 + b4 * tree.a4 + w.xg * tree.l
}

pub fn residual_absorbing_rate(w: &GaussWeights) -> f64 {
    w.total() - w.xg
}

/// Explicit generalized Gauss tree for the given weights.
pub fn solve_gauss_tree(q: &Quadrilateral, w: &GaussWeights) -> Result<GaussTree> {
    let raw = raw_tree(q, w)?;
    if raw.l <= -SPAN_CLAMP {
        return Err(Error::DegenerateTree {
            span: raw.l,
            reason: "negative span: x_G exceeds its absorbing value".into(),
        });
    }
    let slack = 1e-9 * q.diameter();
    for (name, p) in [("A0", raw.node0), ("A0′", raw.node0p)] {
        if !p.is_finite() || !q.contains(p, slack) {
            return Err(Error::DegenerateTree {
                span: raw.l,
                reason: format!("node {name} lies outside the quadrilateral"),
            });
        }
    }
    if raw.a1 < 0.0 || raw.a2 < 0.0 {
        return Err(Error::DegenerateTree { span: raw.l, reason: "negative terminal edge".into() });
    }
    let l = if raw.l <= 0.0 { 0.0 } else { raw.node0.distance(raw.node0p) };
    let mut tree = GaussTree {
        node0: raw.node0,
        node0p: raw.node0p,
        a1: raw.a1,
        a2: raw.a2,
        a3: raw.a3,
        a4: raw.a4,
        l,
        phi: raw.phi,
        objective: 0.0,
    };
    tree.objective = gauss_objective(&tree, w);
    Ok(tree)
}
