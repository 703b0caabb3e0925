use thiserror::Error;

use crate::geometry::Point;

/// Errors raised by the geometry primitives and the tree solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coordinate or value: {0}")]
    NonFinite(&'static str),

    #[error("vertices A{0} and A{1} coincide")]
    CoincidentVertices(usize, usize),

    #[error(
        "quadrilateral is not strictly convex and counterclockwise (turn at A{vertex} has cross product {cross:e})"
    )]
    NotConvex { vertex: usize, cross: f64 },

    #[error("lengths ({a}, {b}, {c}) do not form a triangle")]
    InfeasibleTriangle { a: f64, b: f64, c: f64 },

    #[error("distances are not realizable by a planar quadrilateral: {0}")]
    InconsistentDistances(String),

    #[error("weight {index} must be strictly positive and finite, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("weights ({0}, {1}, {2}) violate the strict weight triangle inequality; the tree is absorbed at a vertex")]
    WeightTriangle(f64, f64, f64),

    #[error("generalized Gauss weights are infeasible: {0}")]
    InfeasibleGaussWeights(String),

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { method: &'static str, iterations: usize, residual: f64, last: Option<Point>, trace: Vec<f64> },

    #[error("solution is inconsistent with the assumed case: {0}")]
    InconsistentCase(String),

    #[error("degenerate generalized Gauss tree (span {span:e}): {reason}")]
    DegenerateTree { span: f64, reason: String },

    #[error("the Fermat-Torricelli point lies on a diagonal; use the squared-balance plasticity system instead")]
    DiagonalPoint,

    #[error("inverse weighted Fermat-Torricelli problem is undefined: {0}")]
    InverseUndefined(String),

    #[error("no positive weight solution: {0}")]
    NoPositiveSolution(String),

    #[error("B4 = {b4} is not feasible for an absorbing tree: {reason}")]
    InfeasibleB4 { b4: f64, reason: String },

    #[error("span root x_G = {root} and objective maximizer x_G = {maximizer} disagree")]
    CrossCheckMismatch { root: f64, maximizer: f64 },

    #[error("storage {storage} is below the universal minimum value {minimum}")]
    BelowMinimum { storage: f64, minimum: f64 },

    #[error("spending {spend} leaves x_G = {xg} at or below the lower weight bound {bound}")]
    OverSpend { spend: f64, xg: f64, bound: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for iterative solver failures as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::CrossCheckMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
