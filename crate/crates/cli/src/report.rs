//! Human-readable tables for run records.

use std::fmt::Write;

use wft_core::fermat::FermatCase;
use wft_core::{FermatTree, GaussTree, Point};

use crate::record::{Output, RunRecord};

/// Fixed notation with ten significant digits, scientific outside `[1e-4, 1e9)`.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        format!("{:.*}", (9 - mag) as usize, x)
    } else {
        format!("{x:.9e}")
    }
}

fn point(p: Point) -> String {
    format!("({}, {})", num(p.x), num(p.y))
}

struct Table {
    out: String,
    color: bool,
}

impl Table {
    fn title(&mut self, s: &str) {
        if self.color {
            let _ = writeln!(self.out, "\x1b[1m{s}\x1b[0m");
        } else {
            let _ = writeln!(self.out, "{s}");
        }
    }

    fn row(&mut self, key: &str, value: impl AsRef<str>) {
        let _ = writeln!(self.out, "  {key:<22} {}", value.as_ref());
    }

    fn angle(&mut self, key: &str, rad: f64) {
        self.row(key, format!("{:<16} rad  {:<16} deg", num(rad), num(rad.to_degrees())));
    }
}

const QUAD_ANGLES: [&str; 4] = ["angle A1 A0 A2", "angle A2 A0 A3", "angle A3 A0 A4", "angle A4 A0 A1"];

fn fermat(t: &mut Table, tree: &FermatTree) {
    let case = match tree.case {
        FermatCase::Floating => "floating".to_string(),
        FermatCase::AbsorbedAtVertex { vertex, boundary } => {
            format!("absorbed at A{}{}", vertex + 1, if boundary { " (boundary)" } else { "" })
        }
        FermatCase::DiagonalIntersection => "diagonal intersection".to_string(),
    };
    t.row("case", case);
    t.row("solver", format!("{:?}", tree.solver));
    t.row("A0", point(tree.point));
    if let Some(angles) = tree.angles {
        for (name, a) in QUAD_ANGLES.iter().zip(angles) {
            t.angle(name, a);
        }
    }
    t.row("objective", num(tree.objective));
    t.row("equilibrium residual", num(tree.equilibrium_residual));
    t.row("iterations", tree.iterations.to_string());
}

fn gauss_tree(t: &mut Table, tree: &GaussTree) {
    t.row("A0", point(tree.node0));
    t.row("A0'", point(tree.node0p));
    for (name, v) in [
        ("a1 = |A1 A0|", tree.a1),
        ("a2 = |A2 A0'|", tree.a2),
        ("a3 = |A3 A0'|", tree.a3),
        ("a4 = |A4 A0|", tree.a4),
        ("l = |A0 A0'|", tree.l),
    ] {
        t.row(name, num(v));
    }
    t.angle("phi", tree.phi);
    t.row("objective", num(tree.objective));
}

pub fn render(record: &RunRecord, color: bool) -> String {
    let mut t = Table { out: String::new(), color };
    t.title(&record.command);
    match &record.output {
        Output::Triangle { tree, .. } => {
            t.row("A0", point(tree.point));
            match tree.absorbed {
                Some(v) => t.row("case", format!("absorbed at A{}", v + 1)),
                None => t.row("case", "floating"),
            }
            if let Some(a) = tree.angles {
                for (name, v) in ["angle A1 A0 A2", "angle A2 A0 A3", "angle A3 A0 A1"].iter().zip(a) {
                    t.angle(name, v);
                }
            }
            t.row("objective", num(tree.objective));
            t.row("equilibrium residual", num(tree.equilibrium_residual));
            t.row("iterations", tree.iterations.to_string());
        }
        Output::Quad { tree, .. } => fermat(&mut t, tree),
        Output::Gauss { weights, local_angles, tree, residual_rate, node_residuals } => {
            t.row("x_G", num(weights.xg));
            gauss_tree(&mut t, tree);
            t.angle("angle A1 A0 A0'", local_angles.a1_0_0p);
            t.angle("angle A0' A0 A4", local_angles.a0p_0_4);
            t.angle("angle A1 A0 A4", local_angles.a1_0_4);
            t.angle("angle A0 A0' A3", local_angles.a0_0p_3);
            t.angle("angle A0 A0' A2", local_angles.a0_0p_2);
            t.angle("angle A2 A0' A3", local_angles.a2_0p_3);
            t.row("residual absorbing rate", num(*residual_rate));
            t.row("node residuals", format!("{}, {}", num(node_residuals[0]), num(node_residuals[1])));
        }
        Output::Plasticity { tree, line, report, balanced } => {
            fermat(&mut t, tree);
            if let Some(line) = line {
                t.row("total weight c", num(line.c));
                for (i, (x, y)) in line.coeffs.iter().enumerate() {
                    t.row(&format!("B{}", i + 1), format!("{} * B4 + {}", num(*x), num(*y)));
                }
                t.row("B4 interval", format!("({}, {})", num(line.b4_interval.0), num(line.b4_interval.1)));
            }
            if let Some(r) = report {
                t.row("samples", r.samples.len().to_string());
                t.row("max deviation", num(r.max_deviation));
                t.row("invariant", if r.passed { "yes" } else { "no" });
            }
            if let Some(sols) = balanced {
                for s in sols {
                    t.row("balanced weights", s.map(num).join(", "));
                }
            }
        }
        Output::Universal { point: p, line, result } => {
            t.row("A0", point(*p));
            t.row("total weight c", num(line.c));
            t.row("u_FT", num(result.u_ft));
            t.row("B4*", num(result.b4_star));
            t.row("rate u_FT / c", num(result.rate));
            t.row("multimodal", if result.multimodal { "yes" } else { "no" });
            t.row("omitted samples", result.omitted.len().to_string());
            let _ = writeln!(
                t.out,
                "\n  {:>16} {:>16} {:>16} {:>16} {:>16} {:>16} {:>16}",
                "B4", "B1", "B2", "B3", "x_G absorbing", "x_G maximizer", "objective"
            );
            for s in &result.samples {
                let _ = writeln!(
                    t.out,
                    "  {:>16} {:>16} {:>16} {:>16} {:>16} {:>16} {:>16}",
                    num(s.b4),
                    num(s.weights[0]),
                    num(s.weights[1]),
                    num(s.weights[2]),
                    num(s.xg_absorbing),
                    num(s.xg_maximizer),
                    num(s.objective)
                );
            }
        }
        Output::Evolve { kind, storage, spend, u_ft, b4, weights, tree } => {
            t.row("tree", format!("{kind:?}").to_lowercase());
            t.row("storage", num(*storage));
            t.row("spend a_G", num(*spend));
            t.row("u_FT", num(*u_ft));
            t.row("B4", num(*b4));
            t.row("weights", weights.b.map(num).join(", "));
            t.row("x_G", num(weights.xg));
            gauss_tree(&mut t, tree);
        }
    }
    if !record.levels.is_empty() {
        t.row("levels", record.levels.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", "));
    }
    t.out
}
