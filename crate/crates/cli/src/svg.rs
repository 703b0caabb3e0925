//! Deterministic SVG rendering of run records.
//!
//! World coordinates are y-up; [`Frame`] maps them to SVG user units with a
//! fixed margin. Level curves of `f(X) = Σ Bᵢ‖Aᵢ − X‖` are traced by marching
//! squares and chained into polylines.

use std::collections::BTreeMap;
use std::fmt::Write;

use wft_core::fermat::weighted_distance_sum;
use wft_core::Point;

use crate::record::{Output, RunRecord};
use crate::CliError;

pub const MARGIN: f64 = 16.0;
/// Extent of the longer side of the drawing, in SVG units.
pub const EXTENT: f64 = 480.0;

pub const OUTLINE: &str = "#343a40";
pub const TERMINAL_EDGE: &str = "#1971c2";
pub const INTERIOR_EDGE: &str = "#e8590c";
pub const NODE: &str = "#c92a2a";
pub const LEVEL: &str = "#2f9e44";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    /// Marching-squares cells along each axis.
    pub grid: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { grid: 200 }
    }
}

/// Maps world coordinates (y up) to SVG units (y down).
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub fn fit(points: &[Point]) -> Self {
        let (x0, x1) = points.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.x), b.max(p.x)));
        let (y0, y1) = points.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let scale = EXTENT / span;
        Self { x0, y1, scale, width: (x1 - x0) * scale + 2.0 * MARGIN, height: (y1 - y0) * scale + 2.0 * MARGIN }
    }

    pub fn map(&self, p: Point) -> (f64, f64) {
        (MARGIN + (p.x - self.x0) * self.scale, MARGIN + (self.y1 - p.y) * self.scale)
    }
}

struct Drawing {
    polygon: Vec<Point>,
    weights: Vec<f64>,
    terminal_edges: Vec<(Point, Point)>,
    interior_edges: Vec<(Point, Point)>,
    nodes: Vec<(Point, &'static str)>,
}

fn star(center: Point, ends: &[Point]) -> Vec<(Point, Point)> {
    ends.iter().filter(|e| **e != center).map(|e| (center, *e)).collect()
}

fn drawing(record: &RunRecord) -> Drawing {
    let polygon = record.input.points();
    let mut d = Drawing {
        polygon: polygon.clone(),
        weights: record.input.weights.clone(),
        terminal_edges: Vec::new(),
        interior_edges: Vec::new(),
        nodes: Vec::new(),
    };
    let gauss = |d: &mut Drawing, b: [f64; 4], t: &wft_core::GaussTree| {
        d.weights = b.to_vec();
        d.terminal_edges =
            vec![(t.node0, polygon[0]), (t.node0p, polygon[1]), (t.node0p, polygon[2]), (t.node0, polygon[3])];
        if t.l > 0.0 {
            d.interior_edges.push((t.node0, t.node0p));
            d.nodes = vec![(t.node0, "A0"), (t.node0p, "A0'")];
        } else {
            d.nodes = vec![(t.node0, "A0")];
        }
    };
    match &record.output {
        Output::Triangle { tree, .. } => {
            d.terminal_edges = star(tree.point, &polygon);
            d.nodes = vec![(tree.point, "A0")];
        }
        Output::Quad { tree, .. } | Output::Plasticity { tree, .. } => {
            d.terminal_edges = star(tree.point, &polygon);
            d.nodes = vec![(tree.point, "A0")];
        }
        Output::Gauss { weights, tree, .. } | Output::Evolve { weights, tree, .. } => gauss(&mut d, weights.b, tree),
        Output::Universal { .. } => {}
    }
    d
}

const LABELS: [&str; 4] = ["A1", "A2", "A3", "A4"];

fn fmt(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Renders a record as an SVG 1.1 document.
pub fn plot_svg(record: &RunRecord, options: &PlotOptions) -> Result<String, CliError> {
    let d = drawing(record);
    if d.terminal_edges.is_empty() && d.nodes.is_empty() && record.levels.is_empty() {
        return Err(CliError::Usage(format!(
            "a `{}` record has no tree to draw; request level curves with --levels",
            record.command
        )));
    }
    if options.grid < 2 {
        return Err(CliError::Usage("the plot grid needs at least two cells".into()));
    }
    let frame = Frame::fit(&d.polygon);
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        fmt(frame.width),
        fmt(frame.height)
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if !record.levels.is_empty() {
        let _ = writeln!(w, r#"<g id="levels" fill="none" stroke="{LEVEL}" stroke-width="1">"#);
        for (k, &c) in record.levels.iter().enumerate() {
            for line in level_curves(&d.polygon, &d.weights, c, options.grid) {
                let _ = writeln!(w, r#"<path data-level="{k}" d="{}"/>"#, path_data(&frame, &line));
            }
        }
        let _ = writeln!(w, "</g>");
    }

    let outline: Vec<String> = d
        .polygon
        .iter()
        .map(|p| {
            let (x, y) = frame.map(*p);
            format!("{},{}", fmt(x), fmt(y))
        })
        .collect();
    let _ = writeln!(
        w,
        r#"<polygon id="outline" points="{}" fill="none" stroke="{OUTLINE}" stroke-width="1.5"/>"#,
        outline.join(" ")
    );

    for (id, colour, edges) in
        [("terminal-edges", TERMINAL_EDGE, &d.terminal_edges), ("interior-edges", INTERIOR_EDGE, &d.interior_edges)]
    {
        if edges.is_empty() {
            continue;
        }
        let _ = writeln!(w, r#"<g id="{id}" stroke="{colour}" stroke-width="2">"#);
        for (a, b) in edges {
            let (x1, y1) = frame.map(*a);
            let (x2, y2) = frame.map(*b);
            let _ = writeln!(w, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, fmt(x1), fmt(y1), fmt(x2), fmt(y2));
        }
        let _ = writeln!(w, "</g>");
    }

    let _ = writeln!(w, r#"<g id="labels" font-family="sans-serif" font-size="12">"#);
    let centre = d.polygon.iter().fold(Point::default(), |a, p| a + *p) * (1.0 / d.polygon.len() as f64);
    let (cx, cy) = frame.map(centre);
    for (p, label) in d.polygon.iter().zip(LABELS) {
        let (x, y) = frame.map(*p);
        // Vertex labels sit inside the outline, toward the centroid.
        let inward = Point::new(cx - x, cy - y).unit().unwrap_or_default() * 14.0;
        let _ = writeln!(w, r#"<circle cx="{}" cy="{}" r="3" fill="{OUTLINE}"/>"#, fmt(x), fmt(y));
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{OUTLINE}">{label}</text>"#,
            fmt(x + inward.x),
            fmt(y + inward.y)
        );
    }
    for (p, label) in &d.nodes {
        let (x, y) = frame.map(*p);
        let _ = writeln!(w, r#"<circle class="node" cx="{}" cy="{}" r="3.5" fill="{NODE}"/>"#, fmt(x), fmt(y));
        let _ = writeln!(w, r#"<text x="{}" y="{}" fill="{NODE}">{label}</text>"#, fmt(x + 5.0), fmt(y - 5.0));
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(out)
}

fn path_data(frame: &Frame, line: &Polyline) -> String {
    let mut s = String::new();
    for (i, p) in line.points.iter().enumerate() {
        let (x, y) = frame.map(*p);
        let _ = write!(s, "{}{} {}", if i == 0 { "M" } else { " L" }, fmt(x), fmt(y));
    }
    if line.closed {
        s.push_str(" Z");
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

/// Crossing on a grid edge: `(vertical, i, j)` names the edge leaving node
/// `(i, j)` to the right (`false`) or upward (`true`).
type EdgeKey = (bool, usize, usize);

/// Level set `f(X) = c` over the terminals' bounding box padded by 5%.
pub fn level_curves(terminals: &[Point], weights: &[f64], c: f64, n: usize) -> Vec<Polyline> {
    let (x0, x1) = terminals.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (y0, y1) = terminals.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let (px, py) = (0.05 * (x1 - x0), 0.05 * (y1 - y0));
    let (x0, x1, y0, y1) = (x0 - px, x1 + px, y0 - py, y1 + py);
    let node =
        |i: usize, j: usize| Point::new(x0 + (x1 - x0) * i as f64 / n as f64, y0 + (y1 - y0) * j as f64 / n as f64);
    let f = |p: Point| weighted_distance_sum(terminals, weights, p) - c;
    let vals: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| f(node(i, j))).collect()).collect();
    let inside = |i: usize, j: usize| vals[i][j] < 0.0;

    let crossing = |k: EdgeKey| {
        let (vertical, i, j) = k;
        let (a, b) = if vertical { ((i, j), (i, j + 1)) } else { ((i, j), (i + 1, j)) };
        let (fa, fb) = (vals[a.0][a.1], vals[b.0][b.1]);
        let t = fa / (fa - fb);
        let (pa, pb) = (node(a.0, a.1), node(b.0, b.1));
        pa + (pb - pa) * t
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let edges: [EdgeKey; 4] = [(false, i, j), (true, i + 1, j), (false, i, j + 1), (true, i, j)];
            let cut: Vec<EdgeKey> = (0..4).filter(|&e| corners[e] != corners[(e + 1) % 4]).map(|e| edges[e]).collect();
            match cut.len() {
                2 => segments.push((cut[0], cut[1])),
                4 => {
                    let centre = f(node(i, j) + (node(i + 1, j + 1) - node(i, j)) * 0.5) < 0.0;
                    if centre == corners[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    chain(&segments)
        .into_iter()
        .map(|(keys, closed)| Polyline { points: keys.into_iter().map(crossing).collect(), closed })
        .collect()
}

fn chain(segments: &[(EdgeKey, EdgeKey)]) -> Vec<(Vec<EdgeKey>, bool)> {
    let mut at: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        at.entry(*a).or_default().push(k);
        at.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut keys = vec![segments[start].0, segments[start].1];
        let mut closed = false;
        // Forward from the tail, then backward from the head.
        for backward in [false, true] {
            loop {
                let end = if backward { keys[0] } else { *keys.last().unwrap() };
                let next = at[&end].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let (a, b) = segments[k];
                let other = if a == end { b } else { a };
                if other == if backward { *keys.last().unwrap() } else { keys[0] } {
                    closed = true;
                    break;
                }
                if backward {
                    keys.insert(0, other);
                } else {
                    keys.push(other);
                }
            }
            if closed {
                break;
            }
        }
        out.push((keys, closed));
    }
    out
}
