//! Problem documents: the JSON input read by every subcommand.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wft_core::{Point, Quadrilateral, SolverOptions, WeightedQuadrilateral};

use crate::CliError;

/// Optional solver settings carried by a document. Command-line flags
/// override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spend: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
}

impl DocOptions {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    /// Three or four `[x, y]` pairs, counterclockwise.
    pub vertices: Vec<[f64; 2]>,
    /// One positive weight per vertex.
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xg: Option<f64>,
    #[serde(default, skip_serializing_if = "DocOptions::is_empty")]
    pub options: DocOptions,
}

impl ProblemDocument {
    /// Parses a document, reporting the line and column of any error.
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let doc: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Document(format!("{source}:{}:{}: {}", e.line(), e.column(), strip_position(&e))))?;
        doc.check_shape(source)?;
        Ok(doc)
    }

    /// Reads a document from a path, or from standard input when the path is `-`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if path == Path::new("-") {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Io { path: "<stdin>".into(), source: e })?;
            return Self::parse(&text, "<stdin>");
        }
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn check_shape(&self, source: &str) -> Result<(), CliError> {
        let n = self.vertices.len();
        if n != 3 && n != 4 {
            return Err(CliError::Document(format!("{source}: expected 3 or 4 vertices, found {n}")));
        }
        if self.weights.len() != n {
            return Err(CliError::Document(format!(
                "{source}: expected {n} weights to match the vertices, found {}",
                self.weights.len()
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Point> {
        self.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect()
    }

    pub fn quadrilateral(&self) -> Result<Quadrilateral, CliError> {
        let p = self.points();
        let v: [Point; 4] =
            p.try_into().map_err(|_| CliError::Usage("this command needs a document with four vertices".into()))?;
        Ok(Quadrilateral::new(v)?)
    }

    pub fn weighted(&self) -> Result<WeightedQuadrilateral, CliError> {
        let q = self.quadrilateral()?;
        let w: [f64; 4] = self.weights[..].try_into().expect("shape checked on parse");
        Ok(WeightedQuadrilateral::new(q, w)?)
    }

    /// Scales the weights and every weight-valued setting so the weights sum to one.
    pub fn normalize_weights(&mut self) {
        let total: f64 = self.weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        for v in [&mut self.xg, &mut self.options.b4, &mut self.options.storage, &mut self.options.spend] {
            if let Some(v) = v {
                *v /= total;
            }
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        if let Some(tol) = self.options.tol {
            opts.tol = tol;
        }
        if let Some(n) = self.options.max_iter {
            opts.newton_max_iter = n;
            opts.weiszfeld_max_iter = n;
        }
        opts
    }
}

/// serde_json appends " at line L column C"; the position is already in the prefix.
fn strip_position(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
  "vertices": [[0, 0], [7, 0], [7, 4], [0, 4]],
  "weights": [3, 2.5, 1.7, 1.5]
}"#;

    #[test]
    fn parses_minimal_document() {
        let d = ProblemDocument::parse(EXAMPLE, "ex").unwrap();
        assert_eq!(d.weights, vec![3.0, 2.5, 1.7, 1.5]);
        assert!(d.xg.is_none() && d.options.is_empty());
        assert!(d.weighted().is_ok());
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = "{\n  \"vertices\": [[0,0],[1,0],[1,1],[0,1]],\n  \"weights\": [1,1,1,1],\n  \"weight\": 2\n}";
        let e = ProblemDocument::parse(text, "doc.json").unwrap_err().to_string();
        assert!(e.starts_with("doc.json:4:"), "{e}");
        assert!(e.contains("unknown field `weight`"), "{e}");
    }

    #[test]
    fn unknown_option_is_rejected() {
        let text = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "weights": [1,1,1,1], "options": {"tolerance": 1}}"#;
        assert!(ProblemDocument::parse(text, "d").unwrap_err().to_string().contains("tolerance"));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let text = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "weights": [1,1,1]}"#;
        assert!(matches!(ProblemDocument::parse(text, "d"), Err(CliError::Document(_))));
        let text = r#"{"vertices": [[0,0],[1,0]], "weights": [1,1]}"#;
        assert!(matches!(ProblemDocument::parse(text, "d"), Err(CliError::Document(_))));
    }

    #[test]
    fn normalization_scales_weight_settings() {
        let mut d = ProblemDocument::parse(EXAMPLE, "ex").unwrap();
        d.xg = Some(4.35);
        d.options.storage = Some(8.7);
        d.normalize_weights();
        assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((d.xg.unwrap() - 0.5).abs() < 1e-15);
        assert!((d.options.storage.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trips() {
        let mut d = ProblemDocument::parse(EXAMPLE, "ex").unwrap();
        d.options.levels = Some(vec![0.5, 1.0]);
        let back = ProblemDocument::parse(&serde_json::to_string(&d).unwrap(), "rt").unwrap();
        assert_eq!(back, d);
    }
}
