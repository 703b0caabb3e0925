//! Weighted Fermat-Torricelli trees of degree four and generalized Gauss
//! trees of degree three on convex quadrilaterals.
//!
//! - [`geometry`]: points, convex quadrilaterals, cosine-law angles and
//!   Cayley-Menger distance consistency.
//! - [`fermat`]: the weighted Fermat-Torricelli point of a quadrilateral
//!   (vertex test, Weiszfeld, the square circle system and the general
//!   angle system).
//! - [`gauss`]: explicit degree-three Steiner trees for given weights.
//! - [`plasticity`]: weight families that keep a tree point fixed.
//! - [`universal`]: absorbing values of the Gauss variable, their minimum,
//!   and tree evolution.
//!
//! Angles are radians throughout.

pub mod error;
pub mod fermat;
pub mod gauss;
pub mod geometry;
pub mod newton;
pub mod plasticity;
pub mod scalar;
pub mod universal;

pub use error::{Error, Result};
pub use fermat::{FermatCase, FermatTree, SolverOptions, WeightedQuadrilateral};
pub use gauss::{GaussTree, GaussWeights};
pub use geometry::{DistanceSet, Point, Quadrilateral};
pub use plasticity::PlasticityLine;
pub use universal::{TreeKind, TreeState, UniversalResult, UniversalSample};
