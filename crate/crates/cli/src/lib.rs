//! Command-line front end for `wft-core`: reads problem documents, runs a
//! solver, prints a table, and optionally writes JSON records and SVG.

pub mod doc;
pub mod record;
pub mod report;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use wft_core::fermat::{locate_3wft, locate_4wft, locate_with_seed, FermatCase};
use wft_core::gauss::{local_angles, residual_absorbing_rate, solve_gauss_tree};
use wft_core::plasticity::{plasticity_line, plasticity_system_new, verify_plasticity};
use wft_core::universal::{evolve, universal_minimum, weights_for_storage, TreeState, DEFAULT_EPSILON, DEFAULT_GRID};
use wft_core::{Error, GaussTree, GaussWeights, Point, SolverOptions};

use doc::ProblemDocument;
use record::{Output, RunRecord};
use svg::PlotOptions;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Document(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Solver(#[from] Error),
}

impl CliError {
    /// 3 for solver non-convergence, 2 for everything caused by the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if e.is_convergence_failure() => 3,
            _ => 2,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        let CliError::Solver(e) = self else { return None };
        Some(match e {
            Error::NotConvex { .. } | Error::CoincidentVertices(..) => {
                "list four distinct vertices of a strictly convex quadrilateral in counterclockwise order"
            }
            Error::NonPositiveWeight { .. } => "every weight must be a positive finite number",
            Error::WeightTriangle(..) => "choose weights where each one is smaller than the sum of the other two",
            Error::InfeasibleGaussWeights(_) => {
                "pick x_G strictly between max(|B1 - B4|, |B2 - B3|) and min(B1 + B4, B2 + B3)"
            }
            Error::NonConvergence { .. } => "raise --max-iter, loosen --tol, or pass --seed-angles",
            Error::CrossCheckMismatch { .. } => "try a different --epsilon or a finer --grid",
            Error::DegenerateTree { .. } => "lower x_G below its absorbing value so both Steiner nodes stay inside",
            Error::DiagonalPoint => "pass --b4 to solve the squared-balance system at one B4 value",
            Error::InverseUndefined(_) => "the weights must give a floating tree point off the vertices",
            Error::BelowMinimum { .. } => "the storage is below u_FT: the tree is steady and does not evolve",
            Error::OverSpend { .. } => "spend less so that x_G stays above its lower weight bound",
            Error::InfeasibleB4 { .. } => "choose B4 inside the line's positive interval",
            Error::NoPositiveSolution(_) => "no positive weights realize this request; change B4 or the storage",
            _ => return None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wft",
    version,
    about = "Weighted Fermat-Torricelli and generalized Gauss trees on convex quadrilaterals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem document (JSON); `-` reads standard input.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Write newline-delimited JSON records here.
    #[arg(long, value_name = "PATH")]
    pub records: Option<PathBuf>,
    /// Write an SVG drawing of the first record here.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Residual tolerance for the iterative solvers.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap for both Newton and Weiszfeld iterations.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Scale the weights (and x_G, B4, storage, spend) so the weights sum to one.
    #[arg(long)]
    pub normalize_weights: bool,
    /// Record the wall-clock time in each record.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weighted Fermat-Torricelli point of a triangle.
    WftTriangle {
        #[command(flatten)]
        common: Common,
    },
    /// Weighted Fermat-Torricelli tree of a quadrilateral.
    WftQuad {
        #[command(flatten)]
        common: Common,
        /// Initial angles: two for the canonical square, four for the general system.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        seed_angles: Option<Vec<f64>>,
    },
    /// Generalized Gauss tree for the document weights and x_G.
    Gauss {
        #[command(flatten)]
        common: Common,
        /// Weight of the interior edge; overrides the document.
        #[arg(long)]
        xg: Option<f64>,
    },
    /// Weight line keeping the tree point fixed, with a re-solve check.
    Plasticity {
        #[command(flatten)]
        common: Common,
        /// Number of B4 samples re-solved along the line.
        #[arg(long)]
        grid: Option<usize>,
        /// Also solve the squared-balance system at this B4.
        #[arg(long)]
        b4: Option<f64>,
    },
    /// Absorbing values of x_G along the weight line and their minimum u_FT.
    Universal {
        #[command(flatten)]
        common: Common,
        /// Number of B4 samples along the line.
        #[arg(long)]
        grid: Option<usize>,
        /// Span at which the interior edge counts as absorbed.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Degree-three tree sprouted from a given storage.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Number of B4 samples along the line.
        #[arg(long)]
        grid: Option<usize>,
        /// Span at which the interior edge counts as absorbed.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Storage level u; must reach u_FT.
        #[arg(long)]
        storage: Option<f64>,
        /// Absorbing rate a_G spent to sprout the tree.
        #[arg(long)]
        spend: Option<f64>,
        /// Use this B4 instead of every B4 whose absorbing value is the storage.
        #[arg(long)]
        b4: Option<f64>,
    },
    /// Draw a tree and level curves of the weighted distance sum.
    Plot {
        /// Problem document; solved as a Gauss tree when x_G is given.
        #[arg(long, value_name = "PATH", required_unless_present = "from")]
        input: Option<PathBuf>,
        /// Draw the first record of a records file instead of solving.
        #[arg(long, value_name = "PATH", conflicts_with = "input")]
        from: Option<PathBuf>,
        /// Output SVG file.
        #[arg(long, value_name = "PATH")]
        svg: PathBuf,
        /// Write the drawn record here.
        #[arg(long, value_name = "PATH")]
        records: Option<PathBuf>,
        /// Weight of the interior edge; overrides the document.
        #[arg(long, conflicts_with = "from")]
        xg: Option<f64>,
        /// Level offsets above the minimum of the weighted distance sum.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        /// Marching-squares cells per axis.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Scale the weights so they sum to one.
        #[arg(long, conflicts_with = "from")]
        normalize_weights: bool,
        /// Record the wall-clock time.
        #[arg(long)]
        stamp: bool,
    },
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = if color { e.render().ansi().to_string() } else { e.render().to_string() };
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, color) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Some(h) = e.hint() {
                let _ = writeln!(err, "hint: {h}");
            }
            e.exit_code()
        }
    }
}

struct Sinks {
    records: Option<PathBuf>,
    svg: Option<PathBuf>,
    stamp: bool,
    grid: usize,
}

fn execute(command: Command, out: &mut dyn Write, color: bool) -> Result<(), CliError> {
    let (mut records, sinks) = match command {
        Command::Plot { input, from, svg, records, xg, levels, grid, normalize_weights, stamp } => {
            let sinks = Sinks { records, svg: Some(svg), stamp, grid };
            let recs = match from {
                Some(path) => {
                    let file = std::fs::File::open(&path)
                        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
                    let recs = record::read_records(std::io::BufReader::new(file)).map_err(CliError::Document)?;
                    let mut first = recs
                        .into_iter()
                        .next()
                        .ok_or_else(|| CliError::Usage(format!("{}: no records to plot", path.display())))?;
                    if let Some(offsets) = levels {
                        let minimum = distance_sum_minimum(&first.input)?;
                        first.levels = offsets.iter().map(|d| minimum + d).collect();
                    }
                    vec![first]
                }
                None => {
                    let mut doc = ProblemDocument::load(input.as_deref().expect("clap requires --input or --from"))?;
                    if normalize_weights {
                        doc.normalize_weights();
                    }
                    if xg.is_some() {
                        doc.xg = xg;
                    }
                    if levels.is_some() {
                        doc.options.levels = levels;
                    }
                    vec![plot_record(doc)?]
                }
            };
            (recs, sinks)
        }
        other => run_solver(other)?,
    };

    if sinks.stamp {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        for r in &mut records {
            r.timestamp = Some(now);
        }
    }
    for r in &records {
        write!(out, "{}", report::render(r, color)).map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?;
    }
    if let Some(path) = &sinks.records {
        let mut buf = Vec::new();
        record::write_records(&mut buf, &records).expect("writing to memory");
        write_file(path, &buf)?;
    }
    if let Some(path) = &sinks.svg {
        let first = records.first().ok_or_else(|| CliError::Usage("nothing to draw".into()))?;
        let text = svg::plot_svg(first, &PlotOptions { grid: sinks.grid })?;
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

fn prepare(common: &Common) -> Result<ProblemDocument, CliError> {
    let mut doc = ProblemDocument::load(&common.input)?;
    if common.normalize_weights {
        doc.normalize_weights();
    }
    if common.tol.is_some() {
        doc.options.tol = common.tol;
    }
    if common.max_iter.is_some() {
        doc.options.max_iter = common.max_iter;
    }
    Ok(doc)
}

fn sinks(common: &Common, grid: usize) -> Sinks {
    Sinks { records: common.records.clone(), svg: common.svg.clone(), stamp: common.stamp, grid }
}

fn record(command: &str, input: ProblemDocument, output: Output) -> RunRecord {
    RunRecord { command: command.into(), input, output, levels: Vec::new(), timestamp: None }
}

fn override_opt<T>(flag: Option<T>, slot: &mut Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn require_four(doc: &ProblemDocument, command: &str) -> Result<(), CliError> {
    if doc.vertices.len() != 4 {
        return Err(CliError::Usage(format!("{command} needs a document with four vertices")));
    }
    Ok(())
}

fn run_solver(command: Command) -> Result<(Vec<RunRecord>, Sinks), CliError> {
    let plot_grid = PlotOptions::default().grid;
    match command {
        Command::WftTriangle { common } => {
            let doc = prepare(&common)?;
            let p = doc.points();
            let v: [Point; 3] = p
                .try_into()
                .map_err(|_| CliError::Usage("wft-triangle needs a document with three vertices".into()))?;
            let w: [f64; 3] = doc.weights[..].try_into().expect("shape checked on parse");
            let tree = locate_3wft(v, w, &doc.solver_options())?;
            let angles_deg = tree.angles.map(|a| a.map(f64::to_degrees));
            Ok((vec![record("wft-triangle", doc, Output::Triangle { tree, angles_deg })], sinks(&common, plot_grid)))
        }
        Command::WftQuad { common, seed_angles } => {
            let mut doc = prepare(&common)?;
            require_four(&doc, "wft-quad")?;
            override_opt(seed_angles, &mut doc.options.seed_angles);
            let tree = solve_quad(&doc)?;
            let angles_deg = tree.angles.map(|a| a.map(f64::to_degrees));
            Ok((vec![record("wft-quad", doc, Output::Quad { tree, angles_deg })], sinks(&common, plot_grid)))
        }
        Command::Gauss { common, xg } => {
            let mut doc = prepare(&common)?;
            require_four(&doc, "gauss")?;
            override_opt(xg, &mut doc.xg);
            let output = gauss_output(&doc)?;
            Ok((vec![record("gauss", doc, output)], sinks(&common, plot_grid)))
        }
        Command::Plasticity { common, grid, b4 } => {
            let mut doc = prepare(&common)?;
            require_four(&doc, "plasticity")?;
            override_opt(grid, &mut doc.options.grid);
            override_opt(b4, &mut doc.options.b4);
            let wq = doc.weighted()?;
            let opts = doc.solver_options();
            let tree = solve_quad(&doc)?;
            let (line, report) = match plasticity_line(&wq, &tree) {
                Ok(line) => {
                    let report = verify_plasticity(&wq.quad, &line, doc.options.grid.unwrap_or(16), &opts)?;
                    (Some(line), Some(report))
                }
                Err(Error::DiagonalPoint) if doc.options.b4.is_some() => (None, None),
                Err(e) => return Err(e.into()),
            };
            let balanced = match (doc.options.b4, tree.angles) {
                (Some(b4), Some(angles)) => Some(plasticity_system_new(angles, wq.total_weight(), b4)?),
                _ => None,
            };
            Ok((
                vec![record("plasticity", doc, Output::Plasticity { tree, line, report, balanced })],
                sinks(&common, plot_grid),
            ))
        }
        Command::Universal { common, grid, epsilon } => {
            let mut doc = prepare(&common)?;
            require_four(&doc, "universal")?;
            override_opt(grid, &mut doc.options.grid);
            override_opt(epsilon, &mut doc.options.epsilon);
            let (_, line, result) = universal_for(&doc)?;
            let out = Output::Universal { point: line.point, line, result };
            Ok((vec![record("universal", doc, out)], sinks(&common, plot_grid)))
        }
        Command::Evolve { common, grid, epsilon, storage, spend, b4 } => {
            let mut doc = prepare(&common)?;
            require_four(&doc, "evolve")?;
            override_opt(grid, &mut doc.options.grid);
            override_opt(epsilon, &mut doc.options.epsilon);
            override_opt(storage, &mut doc.options.storage);
            override_opt(spend, &mut doc.options.spend);
            override_opt(b4, &mut doc.options.b4);
            let storage = doc
                .options
                .storage
                .ok_or_else(|| CliError::Usage("evolve needs a storage (--storage or options.storage)".into()))?;
            let spend = doc.options.spend.unwrap_or(0.0);
            let eps = doc.options.epsilon.unwrap_or(DEFAULT_EPSILON);
            let (q, line, result) = universal_for(&doc)?;
            let kind = TreeState::new(storage, spend, result.u_ft)?.kind;
            let b4s = match doc.options.b4 {
                Some(b4) => vec![b4],
                None => weights_for_storage(&q, &line, &result, storage, eps)?,
            };
            let mut records = Vec::new();
            for b4 in b4s {
                let tree = evolve(&q, &line, &result, storage, spend, b4, eps)?;
                let weights = GaussWeights::new(line.weights_at(b4), storage - spend);
                let out = Output::Evolve { kind, storage, spend, u_ft: result.u_ft, b4, weights, tree };
                records.push(record("evolve", doc.clone(), out));
            }
            Ok((records, sinks(&common, plot_grid)))
        }
        Command::Plot { .. } => unreachable!("plot is handled by execute"),
    }
}

fn solve_quad(doc: &ProblemDocument) -> Result<wft_core::FermatTree, CliError> {
    let wq = doc.weighted()?;
    let opts = doc.solver_options();
    Ok(match &doc.options.seed_angles {
        Some(seed) => locate_with_seed(&wq, Some(seed), &opts)?,
        None => locate_4wft(&wq, &opts)?,
    })
}

fn gauss_output(doc: &ProblemDocument) -> Result<Output, CliError> {
    let q = doc.quadrilateral()?;
    let xg = doc.xg.ok_or_else(|| CliError::Usage("gauss needs x_G (--xg or the document's xg)".into()))?;
    let b: [f64; 4] = doc.weights[..].try_into().expect("shape checked on parse");
    let weights = GaussWeights::new(b, xg);
    let tree = solve_gauss_tree(&q, &weights)?;
    Ok(Output::Gauss {
        weights,
        local_angles: local_angles(&weights)?,
        node_residuals: node_residuals(&q.vertices(), &weights, &tree),
        residual_rate: residual_absorbing_rate(&weights),
        tree,
    })
}

fn node_residuals(v: &[Point; 4], w: &GaussWeights, t: &GaussTree) -> [f64; 2] {
    let pull = |at: Point, ends: &[(Point, f64)]| {
        ends.iter().filter_map(|&(p, b)| (p - at).unit().map(|u| u * b)).fold(Point::default(), |a, b| a + b).norm()
    };
    let [b1, b2, b3, b4] = w.b;
    [
        pull(t.node0, &[(v[0], b1), (v[3], b4), (t.node0p, w.xg)]),
        pull(t.node0p, &[(v[1], b2), (v[2], b3), (t.node0, w.xg)]),
    ]
}

fn universal_for(
    doc: &ProblemDocument,
) -> Result<(wft_core::Quadrilateral, wft_core::PlasticityLine, wft_core::UniversalResult), CliError> {
    let wq = doc.weighted()?;
    let tree = locate_4wft(&wq, &doc.solver_options())?;
    if !matches!(tree.case, FermatCase::Floating) {
        return Err(Error::InverseUndefined("the weight line needs a floating tree point".into()).into());
    }
    let line = plasticity_line(&wq, &tree)?;
    let grid = doc.options.grid.unwrap_or(DEFAULT_GRID);
    let eps = doc.options.epsilon.unwrap_or(DEFAULT_EPSILON);
    let result = universal_minimum(&wq.quad, &line, grid, eps, 1e-10)?;
    Ok((wq.quad, line, result))
}

/// Solves the document for drawing: a Gauss tree when x_G is set, otherwise
/// the weighted Fermat-Torricelli tree. Level offsets become absolute values.
pub fn plot_record(doc: ProblemDocument) -> Result<RunRecord, CliError> {
    let opts: SolverOptions = doc.solver_options();
    let (output, minimum) = if doc.vertices.len() == 3 {
        let (v, w) = triangle(&doc);
        let tree = locate_3wft(v, w, &opts)?;
        let angles_deg = tree.angles.map(|a| a.map(f64::to_degrees));
        let m = tree.objective;
        (Output::Triangle { tree, angles_deg }, m)
    } else {
        let tree = solve_quad(&doc)?;
        let m = tree.objective;
        if doc.xg.is_some() {
            (gauss_output(&doc)?, m)
        } else {
            let angles_deg = tree.angles.map(|a| a.map(f64::to_degrees));
            (Output::Quad { tree, angles_deg }, m)
        }
    };
    let levels = doc.options.levels.clone().unwrap_or_default().iter().map(|d| minimum + d).collect();
    let mut r = record("plot", doc, output);
    r.levels = levels;
    Ok(r)
}

fn triangle(doc: &ProblemDocument) -> ([Point; 3], [f64; 3]) {
    let v: [Point; 3] = doc.points().try_into().expect("three vertices");
    let w: [f64; 3] = doc.weights[..].try_into().expect("shape checked on parse");
    (v, w)
}

/// Minimum of the weighted distance sum for the document's terminals.
fn distance_sum_minimum(doc: &ProblemDocument) -> Result<f64, CliError> {
    let opts = doc.solver_options();
    Ok(if doc.vertices.len() == 3 {
        let (v, w) = triangle(doc);
        locate_3wft(v, w, &opts)?.objective
    } else {
        locate_4wft(&doc.weighted()?, &opts)?.objective
    })
}
