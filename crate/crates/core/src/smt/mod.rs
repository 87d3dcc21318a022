//! Steiner minimal trees (shortest total length, no edge bound).

pub mod euclidean;
pub mod fermat;
pub mod parallelogram;

pub use euclidean::{euclidean_smt, euclidean_smt_for_topology, min_edge_angle, relax_topology, SmtOptions};
pub use fermat::{fermat_point, geometric_median, polygon_fermat_point};
pub use parallelogram::{
    enclosing_diagonalized_parallelogram, parallelogram_smt3, tessellation_check, tessellation_point_by_radii,
    TessellationResult,
};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::Norm;
use crate::scalar::{Scalar, DEGENERATE_EPS};
use crate::tree::EmbeddedTree;

#[derive(Clone, Debug)]
pub struct SmtResult<T> {
    /// Full-form tree; collapsed Steiner points show up as zero-length edges.
    pub tree: EmbeddedTree<T>,
    pub length: T,
    /// Index of the winning topology in enumeration order.
    pub topology_rank: usize,
    pub degenerate_edges: Vec<(String, String)>,
    /// Second-best topology length minus the best; `None` with one topology.
    pub runner_up_gap: Option<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> SmtResult<T> {
    /// The tree with degenerate edges contracted.
    pub fn contracted(&self) -> Result<EmbeddedTree<T>> {
        self.tree.contract_degenerate(T::lit(DEGENERATE_EPS))
    }
}

/// Steiner minimal tree under any supported norm: Euclidean up to
/// `opts.max_n` terminals, any polygon norm for `n <= 3`.
pub fn smt<T: Scalar>(norm: &Norm<T>, terminals: &[Point<T>], opts: &SmtOptions<T>) -> Result<SmtResult<T>> {
    let ball = match norm {
        Norm::Euclidean => return euclidean_smt(terminals, opts),
        Norm::Polygon(b) => b,
    };
    match terminals.len() {
        2 => {
            let tree = EmbeddedTree::from_parts(
                &[("t1", terminals[0]), ("t2", terminals[1])],
                &[],
                &[("t1", "t2")],
                norm.clone(),
            )?;
            let length = tree.total_length();
            Ok(SmtResult { tree, length, topology_rank: 0, degenerate_edges: vec![], runner_up_gap: None, warnings: vec![] })
        }
        3 => {
            let t = [terminals[0], terminals[1], terminals[2]];
            let tree = if crate::norms::classify(norm).is_parallelogram() {
                parallelogram_smt3(norm, t)?.0
            } else {
                star3(norm, t, polygon_fermat_point(ball, &t))?
            };
            let length = tree.total_length();
            let degenerate_edges = euclidean::degenerate_edge_labels(&tree);
            Ok(SmtResult { tree, length, topology_rank: 0, degenerate_edges, runner_up_gap: None, warnings: vec![] })
        }
        n => Err(Error::Capacity(format!("polygon-norm SMT supports n <= 3 terminals, got {n}"))),
    }
}

/// The star joining three terminals to `center`, labelled `t1..t3`, `s1`.
pub fn star3<T: Scalar>(norm: &Norm<T>, t: [Point<T>; 3], center: Point<T>) -> Result<EmbeddedTree<T>> {
    EmbeddedTree::from_parts(
        &[("t1", t[0]), ("t2", t[1]), ("t3", t[2])],
        &[("s1", center)],
        &[("t1", "s1"), ("t2", "s1"), ("t3", "s1")],
        norm.clone(),
    )
}
