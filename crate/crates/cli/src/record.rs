//! Machine-readable run records, written as newline-delimited JSON.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use wft_core::fermat::TriangleTree;
use wft_core::gauss::LocalAngles;
use wft_core::plasticity::PlasticityReport;
use wft_core::{FermatTree, GaussTree, GaussWeights, PlasticityLine, Point, TreeKind, UniversalResult};

use crate::doc::ProblemDocument;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Output {
    Triangle {
        tree: TriangleTree,
        angles_deg: Option<[f64; 3]>,
    },
    Quad {
        tree: FermatTree,
        angles_deg: Option<[f64; 4]>,
    },
    Gauss {
        weights: GaussWeights,
        local_angles: LocalAngles,
        tree: GaussTree,
        residual_rate: f64,
        /// Equilibrium residuals at the two Steiner nodes.
        node_residuals: [f64; 2],
    },
    Plasticity {
        tree: FermatTree,
        line: Option<PlasticityLine>,
        report: Option<PlasticityReport>,
        /// Positive solutions of the squared-balance system at the requested `B4`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        balanced: Option<Vec<[f64; 4]>>,
    },
    Universal {
        point: Point,
        line: PlasticityLine,
        result: UniversalResult,
    },
    Evolve {
        kind: TreeKind,
        storage: f64,
        spend: f64,
        u_ft: f64,
        b4: f64,
        weights: GaussWeights,
        tree: GaussTree,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// Effective input after flags and normalization are applied.
    pub input: ProblemDocument,
    pub output: Output,
    /// Absolute values of the objective whose level curves are drawn.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
    /// Seconds since the Unix epoch; only set on request so repeated runs stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records contain only finite numbers and plain data")
    }
}

pub fn write_records(mut out: impl Write, records: &[RunRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn read_records(input: impl BufRead) -> Result<Vec<RunRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("record {}: {e}", i + 1))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wft_core::fermat::locate_4wft;
    use wft_core::SolverOptions;

    #[test]
    fn quad_record_round_trips_exactly() {
        let doc =
            ProblemDocument::parse(r#"{"vertices": [[0,0],[7,0],[7,4],[0,4]], "weights": [3, 2.5, 1.7, 1.5]}"#, "t")
                .unwrap();
        let tree = locate_4wft(&doc.weighted().unwrap(), &SolverOptions::default()).unwrap();
        let angles_deg = tree.angles.map(|a| a.map(f64::to_degrees));
        let rec = RunRecord {
            command: "wft-quad".into(),
            input: doc,
            output: Output::Quad { tree, angles_deg },
            levels: vec![0.1 + 0.2, 1.0 / 3.0],
            timestamp: Some(1_700_000_000),
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[rec.clone(), rec.clone()]).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back, vec![rec.clone(), rec]);
    }

    #[test]
    fn bad_record_line_is_reported() {
        let e = read_records(&b"\n{\"command\": 1}\n"[..]).unwrap_err();
        assert!(e.starts_with("record 2"), "{e}");
    }
}
