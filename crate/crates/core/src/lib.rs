//! Bead-count minimization for Steiner trees with bounded edge length in
//! normed planes.
//!
//! The core is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, which is what the solvers and tolerances target.

pub mod constructions;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod norms;
pub mod oracle;
pub mod render;
pub mod scalar;
pub mod smt;
pub mod topology;
pub mod tree;

pub use error::{Error, Result};
pub use scalar::{ceil_eps, is_integer_eps, Scalar};
pub use topology::{FullTopology, NodeKind, Topology};

pub type Point = geometry::Point<f64>;
pub type Line = geometry::Line<f64>;
pub type Norm = norms::Norm<f64>;
pub type BallClass = norms::BallClass<f64>;
pub type EmbeddedTree = tree::EmbeddedTree<f64>;
pub type BeadReport = tree::BeadReport<f64>;
pub type SmtResult = smt::SmtResult<f64>;
pub type TessellationResult = smt::TessellationResult<f64>;
pub type HeuristicResult = oracle::HeuristicResult<f64>;
pub type OracleResult = oracle::OracleResult<f64>;
