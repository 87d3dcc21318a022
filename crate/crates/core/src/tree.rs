//! Embedded trees, full-form splitting and bead counting.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::Norm;
use crate::scalar::{ceil_eps, is_integer_eps, Scalar, DEGENERATE_EPS};
use crate::topology::{FullTopology, NodeKind, Topology};

/// A topology with a position for every node, measured under a norm.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedTree<T> {
    topology: Topology,
    positions: Vec<Point<T>>,
    norm: Norm<T>,
}

/// One edge of the full-form tree with its length and epsilon ceiling.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeCeiling<T> {
    pub edge: (String, String),
    pub length: T,
    pub ceiling: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BeadReport<T> {
    pub bead_count: i64,
    pub per_edge_ceilings: Vec<EdgeCeiling<T>>,
    /// Integer-length edges of the full form (zero-length edges count).
    pub integer_edge_count: usize,
    /// Number of full components: one plus the sum of `deg - 1` over terminals.
    pub full_component_count: usize,
}

/// Every bead of a tree (Steiner beads and degree-two subdivision points)
/// together with the sub-segments the beading produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Beading<T> {
    pub beads: Vec<Point<T>>,
    pub segments: Vec<(Point<T>, Point<T>)>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl<T: Scalar> EmbeddedTree<T> {
    pub fn new(topology: Topology, positions: Vec<Point<T>>, norm: Norm<T>) -> Result<Self> {
        if positions.len() != topology.node_count() {
            return Err(Error::Structural(format!(
                "{} positions for {} nodes",
                positions.len(),
                topology.node_count()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::Input(format!("node {:?} has a non-finite position", topology.label(i))));
        }
        Ok(EmbeddedTree { topology, positions, norm })
    }

    /// A single-edge tree or a path, star etc. built from labelled parts.
    pub fn from_parts<S: AsRef<str>>(
        terminals: &[(S, Point<T>)],
        steiners: &[(S, Point<T>)],
        edges: &[(S, S)],
        norm: Norm<T>,
    ) -> Result<Self> {
        let tl: Vec<&str> = terminals.iter().map(|(l, _)| l.as_ref()).collect();
        let sl: Vec<&str> = steiners.iter().map(|(l, _)| l.as_ref()).collect();
        let el: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_ref(), b.as_ref())).collect();
        let topology = Topology::from_labels(&tl, &sl, &el)?;
        let positions = terminals.iter().chain(steiners.iter()).map(|(_, p)| *p).collect();
        EmbeddedTree::new(topology, positions, norm)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn positions(&self) -> &[Point<T>] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Point<T> {
        self.positions[i]
    }

    pub fn position_of(&self, label: &str) -> Option<Point<T>> {
        self.topology.index_of(label).map(|i| self.positions[i])
    }

    pub fn norm(&self) -> &Norm<T> {
        &self.norm
    }

    pub fn terminal_count(&self) -> usize {
        self.topology.terminal_count()
    }

    pub fn terminal_positions(&self) -> Vec<Point<T>> {
        self.topology.terminals().map(|i| self.positions[i]).collect()
    }

    pub fn with_positions(&self, positions: Vec<Point<T>>) -> Result<Self> {
        EmbeddedTree::new(self.topology.clone(), positions, self.norm.clone())
    }

    pub fn set_position(&mut self, i: usize, p: Point<T>) {
        self.positions[i] = p;
    }

    pub fn edge_length(&self, e: usize) -> T {
        let (a, b) = self.topology.edges()[e];
        self.norm.distance(self.positions[a], self.positions[b])
    }

    pub fn edge_lengths(&self) -> Vec<T> {
        (0..self.topology.edges().len()).map(|e| self.edge_length(e)).collect()
    }

    pub fn total_length(&self) -> T {
        self.edge_lengths().into_iter().sum()
    }

    pub fn is_full(&self) -> bool {
        self.topology.is_full()
    }

    /// The full topology, if this tree is already in full form.
    pub fn full_topology(&self) -> Result<FullTopology> {
        FullTopology::new(self.topology.clone())
    }

    /// Splits high-degree nodes so terminals have degree one and Steiner nodes
    /// degree three. New nodes are labelled `<orig>#k` and sit on the split
    /// node, joined by zero-length edges.
    pub fn to_full_form(&self) -> Result<EmbeddedTree<T>> {
        let t = &self.topology;
        if t.is_full() {
            return Ok(self.clone());
        }
        let mut labels: Vec<String> = t.labels().to_vec();
        let mut kinds: Vec<NodeKind> = t.kinds().to_vec();
        let mut positions = self.positions.clone();
        let mut taken: BTreeSet<String> = labels.iter().cloned().collect();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        // Each original edge is attached to the split copies of its endpoints.
        let mut slot_of_edge: Vec<(usize, usize)> = t.edges().to_vec();
        for v in 0..t.node_count() {
            let d = t.degree(v);
            let keep = match t.kind(v) {
                NodeKind::Terminal => 1,
                NodeKind::Steiner => 3,
            };
            if d <= keep {
                continue;
            }
            let extra = d - keep;
            let mut chain = vec![v];
            for _ in 0..extra {
                let mut k = 1;
                let mut label = format!("{}#{k}", t.label(v));
                while taken.contains(&label) {
                    k += 1;
                    label = format!("{}#{k}", t.label(v));
                }
                taken.insert(label.clone());
                labels.push(label);
                kinds.push(NodeKind::Steiner);
                positions.push(self.positions[v]);
                chain.push(labels.len() - 1);
            }
            for w in chain.windows(2) {
                edges.push((w[0], w[1]));
            }
            // Capacity for original edges at each chain node.
            let mut capacity: Vec<usize> = chain
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let chain_deg = if i == 0 || i == chain.len() - 1 { 1 } else { 2 };
                    let target = if i == 0 { keep } else { 3 };
                    target - chain_deg
                })
                .collect();
            let mut slot = 0;
            let incident: Vec<usize> =
                (0..t.edges().len()).filter(|&e| t.edges()[e].0 == v || t.edges()[e].1 == v).collect();
            for e in incident {
                while capacity[slot] == 0 {
                    slot += 1;
                }
                capacity[slot] -= 1;
                let (a, b) = slot_of_edge[e];
                if t.edges()[e].0 == v {
                    slot_of_edge[e] = (chain[slot], b);
                } else {
                    slot_of_edge[e] = (a, chain[slot]);
                }
            }
        }
        edges.extend(slot_of_edge);
        let topology = Topology::new(labels, kinds, edges)?;
        let full = FullTopology::new(topology)?;
        EmbeddedTree::new(full.into_inner(), positions, self.norm.clone())
    }

    pub fn bead_count(&self) -> BeadReport<T> {
        let full = self.to_full_form().expect("a valid tree always splits into full form");
        let ft = full.topology();
        let n = ft.terminal_count() as i64;
        let mut per_edge = Vec::with_capacity(ft.edges().len());
        let mut sum = 0i64;
        let mut integer = 0usize;
        for (e, &(a, b)) in ft.edges().iter().enumerate() {
            let length = full.edge_length(e);
            let ceiling = ceil_eps(length);
            sum += ceiling;
            if is_integer_eps(length) {
                integer += 1;
            }
            per_edge.push(EdgeCeiling { edge: (ft.label(a).to_string(), ft.label(b).to_string()), length, ceiling });
        }
        let c = 1 + self.topology.terminals().map(|x| self.topology.degree(x).saturating_sub(1)).sum::<usize>();
        BeadReport {
            bead_count: if n <= 1 { 0 } else { 1 - n + sum },
            per_edge_ceilings: per_edge,
            integer_edge_count: integer,
            full_component_count: c,
        }
    }

    /// Steiner beads (one per cluster of nodes joined by zero-length edges
    /// with no terminal) and subdivision points, plus the resulting segments.
    pub fn beading(&self) -> Beading<T> {
        let full = self.to_full_form().expect("a valid tree always splits into full form");
        let ft = full.topology();
        let lengths = full.edge_lengths();
        let mut uf = UnionFind::new(ft.node_count());
        for (e, &(a, b)) in ft.edges().iter().enumerate() {
            if ceil_eps(lengths[e]) == 0 {
                uf.union(a, b);
            }
        }
        let mut has_terminal = vec![false; ft.node_count()];
        for t in ft.terminals() {
            let r = uf.find(t);
            has_terminal[r] = true;
        }
        let mut beads = Vec::new();
        let mut seen = vec![false; ft.node_count()];
        for s in ft.steiners() {
            let r = uf.find(s);
            if !has_terminal[r] && !seen[r] {
                seen[r] = true;
                beads.push(full.positions[s]);
            }
        }
        let mut segments = Vec::new();
        for (e, &(a, b)) in ft.edges().iter().enumerate() {
            let k = ceil_eps(lengths[e]);
            if k == 0 {
                continue;
            }
            let (pa, pb) = (full.positions[a], full.positions[b]);
            let mut prev = pa;
            for i in 1..k {
                let p = pa.lerp(pb, T::from_i64(i).unwrap() / T::from_i64(k).unwrap());
                beads.push(p);
                segments.push((prev, p));
                prev = p;
            }
            segments.push((prev, pb));
        }
        Beading { beads, segments }
    }

    pub fn bead_positions(&self) -> Vec<Point<T>> {
        self.beading().beads
    }

    /// Pairs of edges (indices into the full form) that meet at a Steiner bead
    /// at an angle within `1e-7` of pi. Zero-length edges are ignored and
    /// Steiner nodes joined by zero-length edges are treated as one bead.
    pub fn steiner_bonds(&self) -> Result<Vec<(usize, usize)>> {
        let ft = self.full_topology()?;
        let lengths = self.edge_lengths();
        let degenerate = |e: usize| lengths[e] <= T::lit(DEGENERATE_EPS);
        let mut uf = UnionFind::new(ft.node_count());
        for (e, &(a, b)) in ft.edges().iter().enumerate() {
            if degenerate(e) {
                uf.union(a, b);
            }
        }
        let mut has_terminal = vec![false; ft.node_count()];
        for t in ft.terminals() {
            let r = uf.find(t);
            has_terminal[r] = true;
        }
        let mut bonds = Vec::new();
        let tol = T::lit(1e-7);
        for root in 0..ft.node_count() {
            if ft.is_terminal(root) || uf.find(root) != root || has_terminal[root] {
                continue;
            }
            // outgoing (edge, direction) pairs leaving the cluster
            let mut out: Vec<(usize, Point<T>)> = Vec::new();
            for (e, &(a, b)) in ft.edges().iter().enumerate() {
                if degenerate(e) {
                    continue;
                }
                let (ra, rb) = (uf.find(a), uf.find(b));
                if ra == root {
                    out.push((e, self.positions[b] - self.positions[a]));
                } else if rb == root {
                    out.push((e, self.positions[a] - self.positions[b]));
                }
            }
            for i in 0..out.len() {
                for j in i + 1..out.len() {
                    let angle = out[i].1.angle_to(out[j].1);
                    if (T::PI() - angle).abs() <= tol {
                        bonds.push((out[i].0.min(out[j].0), out[i].0.max(out[j].0)));
                    }
                }
            }
        }
        bonds.sort_unstable();
        Ok(bonds)
    }

    /// Merges nodes joined by edges no longer than `eps`. Terminals absorb
    /// Steiner nodes; a purely Steiner cluster keeps its first member's label.
    pub fn contract_degenerate(&self, eps: T) -> Result<EmbeddedTree<T>> {
        let t = &self.topology;
        let lengths = self.edge_lengths();
        let mut uf = UnionFind::new(t.node_count());
        for (e, &(a, b)) in t.edges().iter().enumerate() {
            if lengths[e] <= eps {
                uf.union(a, b);
            }
        }
        let n = t.node_count();
        let mut rep = vec![usize::MAX; n];
        for v in 0..n {
            let r = uf.find(v);
            if t.is_terminal(v) {
                if rep[r] != usize::MAX && t.is_terminal(rep[r]) {
                    return Err(Error::Input(format!(
                        "terminals {:?} and {:?} coincide",
                        t.label(rep[r]),
                        t.label(v)
                    )));
                }
                rep[r] = v;
            } else if rep[r] == usize::MAX {
                rep[r] = v;
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&v| rep[uf.find(v)] == v).collect();
        let mut new_index = vec![usize::MAX; n];
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let labels = keep.iter().map(|&v| t.label(v).to_string()).collect();
        let kinds = keep.iter().map(|&v| t.kind(v)).collect();
        let positions = keep.iter().map(|&v| self.positions[v]).collect();
        let edges = t
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, _)| lengths[e] > eps)
            .map(|(_, &(a, b))| (new_index[rep[uf.find(a)]], new_index[rep[uf.find(b)]]))
            .collect();
        EmbeddedTree::new(Topology::new(labels, kinds, edges)?, positions, self.norm.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::full_topologies;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    #[test]
    fn degree_four_terminal_splits_into_three_zero_edges() {
        let tree = EmbeddedTree::from_parts(
            &[("t", p(0.0, 0.0)), ("a", p(1.0, 0.0)), ("b", p(0.0, 1.0)), ("c", p(-1.0, 0.0)), ("d", p(0.0, -2.0))],
            &[],
            &[("t", "a"), ("t", "b"), ("t", "c"), ("t", "d")],
            Norm::Euclidean,
        )
        .unwrap();
        let full = tree.to_full_form().unwrap();
        assert!(full.is_full());
        let t = full.topology().index_of("t").unwrap();
        assert_eq!(full.topology().degree(t), 1);
        let zeros = full.edge_lengths().iter().filter(|l| **l == 0.0).count();
        assert_eq!(zeros, 3);
        assert_eq!(full.topology().steiner_count(), 3);
        assert!((full.total_length() - tree.total_length()).abs() < 1e-15);
    }

    #[test]
    fn path_of_three_splits_middle_once() {
        let tree = EmbeddedTree::from_parts(
            &[("a", p(0.0, 0.0)), ("b", p(1.0, 0.0)), ("c", p(2.0, 1.0))],
            &[],
            &[("a", "b"), ("b", "c")],
            Norm::Euclidean,
        )
        .unwrap();
        let full = tree.to_full_form().unwrap();
        assert_eq!(full.topology().steiner_count(), 1);
        assert_eq!(full.topology().edges().len(), 3);
        assert_eq!(full.position_of("b#1"), Some(p(1.0, 0.0)));
        assert_eq!(full.edge_lengths().iter().filter(|l| **l == 0.0).count(), 1);
    }

    #[test]
    fn high_degree_steiner_split() {
        let tree = EmbeddedTree::from_parts(
            &[("a", p(1.0, 0.0)), ("b", p(0.0, 1.0)), ("c", p(-1.0, 0.0)), ("d", p(0.0, -1.0)), ("e", p(1.0, 1.0))],
            &[("s", p(0.0, 0.0))],
            &[("s", "a"), ("s", "b"), ("s", "c"), ("s", "d"), ("s", "e")],
            Norm::Euclidean,
        )
        .unwrap();
        let full = tree.to_full_form().unwrap();
        assert!(full.is_full());
        assert_eq!(full.edge_lengths().iter().filter(|l| **l == 0.0).count(), 2);
    }

    #[test]
    fn full_tree_is_unchanged() {
        let tree = equilateral(1.2);
        assert_eq!(tree.to_full_form().unwrap(), tree);
    }

    fn equilateral(side: f64) -> EmbeddedTree<f64> {
        let r = side / 3f64.sqrt();
        let pts: Vec<_> = (0..3).map(|k| Point::polar(std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0) * r).collect();
        EmbeddedTree::from_parts(
            &[("t1", pts[0]), ("t2", pts[1]), ("t3", pts[2])],
            &[("s", p(0.0, 0.0))],
            &[("t1", "s"), ("t2", "s"), ("t3", "s")],
            Norm::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn bead_count_examples() {
        let edge = EmbeddedTree::from_parts(&[("a", p(0.0, 0.0)), ("b", p(2.5, 0.0))], &[], &[("a", "b")], Norm::Euclidean).unwrap();
        assert_eq!(edge.bead_count().bead_count, 2);

        let eq = equilateral(1.2);
        let report = eq.bead_count();
        assert_eq!(report.bead_count, 1);
        assert_eq!(eq.bead_positions().len(), 1);
        assert_eq!(report.full_component_count, 1);

        // Two sides of 5.1 meeting at 120 degrees.
        let b = p(0.0, 0.0);
        let a = Point::polar(0.0) * 5.1;
        let c = Point::polar(2.0 * std::f64::consts::PI / 3.0) * 5.1;
        let path = EmbeddedTree::from_parts(&[("a", a), ("b", b), ("c", c)], &[], &[("a", "b"), ("b", "c")], Norm::Euclidean).unwrap();
        let r = path.bead_count();
        assert_eq!(r.bead_count, 10);
        assert_eq!(r.full_component_count, 2);
        assert_eq!(path.bead_positions().len(), 10);
    }

    #[test]
    fn bead_position_examples() {
        let edge = EmbeddedTree::from_parts(&[("a", p(0.0, 0.0)), ("b", p(2.5, 0.0))], &[], &[("a", "b")], Norm::Euclidean).unwrap();
        let beads = edge.bead_positions();
        assert_eq!(beads.len(), 2);
        assert!((beads[0].x - 2.5 / 3.0).abs() < 1e-12);
        assert!((beads[1].x - 5.0 / 3.0).abs() < 1e-12);

        let short = EmbeddedTree::from_parts(&[("a", p(0.0, 0.0)), ("b", p(0.9, 0.0))], &[], &[("a", "b")], Norm::Euclidean).unwrap();
        assert!(short.bead_positions().is_empty());

        let l1 = EmbeddedTree::from_parts(&[("a", p(0.0, 0.0)), ("b", p(3.0, 4.0))], &[], &[("a", "b")], Norm::l1()).unwrap();
        let beads = l1.bead_positions();
        assert_eq!(beads.len(), 6);
        for (k, b) in beads.iter().enumerate() {
            let t = (k + 1) as f64 / 7.0;
            assert!((b.x - 3.0 * t).abs() < 1e-12 && (b.y - 4.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn bonds() {
        assert!(equilateral(2.0).steiner_bonds().unwrap().is_empty());
        // Steiner bead on the segment t1-t2 with a third branch.
        let bonded = EmbeddedTree::from_parts(
            &[("t1", p(-2.0, 0.0)), ("t2", p(2.0, 0.0)), ("t3", p(0.0, 3.0))],
            &[("s", p(0.0, 0.0))],
            &[("t1", "s"), ("t2", "s"), ("t3", "s")],
            Norm::Euclidean,
        )
        .unwrap();
        assert_eq!(bonded.steiner_bonds().unwrap().len(), 1);
        // Degree-two Steiner nodes are rejected before bonds can be asked for.
        assert!(EmbeddedTree::from_parts(
            &[("a", p(0.0, 0.0)), ("c", p(2.0, 0.0))],
            &[("b", p(1.0, 0.0))],
            &[("a", "b"), ("b", "c")],
            Norm::Euclidean
        )
        .is_err());
    }

    #[test]
    fn contraction_merges_zero_edges() {
        let tree = EmbeddedTree::from_parts(
            &[("a", p(0.0, 0.0)), ("b", p(2.0, 0.0)), ("c", p(0.0, 2.0))],
            &[("s", p(0.0, 0.0))],
            &[("a", "s"), ("b", "s"), ("c", "s")],
            Norm::Euclidean,
        )
        .unwrap();
        let c = tree.contract_degenerate(1e-9).unwrap();
        assert_eq!(c.topology().node_count(), 3);
        assert_eq!(c.topology().degree(c.topology().index_of("a").unwrap()), 2);
        assert_eq!(c.bead_count().bead_count, tree.bead_count().bead_count);
        assert_eq!(c.bead_count().full_component_count, 2);
    }

    fn random_full_tree(rng: &mut ChaCha8Rng, n: usize) -> EmbeddedTree<f64> {
        let names: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
        let tops = full_topologies(&names);
        let top = tops[rng.gen_range(0..tops.len())].clone().into_inner();
        let positions = (0..top.node_count()).map(|_| p(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0))).collect();
        EmbeddedTree::new(top, positions, Norm::Euclidean).unwrap()
    }

    #[test]
    fn formula_agrees_with_subdivision_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(2..=7);
            let tree = random_full_tree(&mut rng, n);
            let report = tree.bead_count();
            let ft = tree.topology();
            let direct = ft.steiner_count() as i64
                + tree.edge_lengths().iter().map(|&l| (ceil_eps(l) - 1).max(0)).sum::<i64>();
            assert_eq!(report.bead_count, direct);
            assert_eq!(tree.bead_positions().len() as i64, report.bead_count);
            for (a, b) in tree.beading().segments {
                assert!(tree.norm().distance(a, b) <= 1.0 + 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn splitting_preserves_length_and_terminals(
            coords in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 5),
            hub in 0usize..5,
        ) {
            // A star on five terminals rooted at a terminal hub.
            let labels: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
            let terminals: Vec<(String, Point<f64>)> =
                labels.iter().cloned().zip(coords.iter().map(|&(x, y)| p(x, y))).collect();
            let edges: Vec<(String, String)> =
                (0..5).filter(|&i| i != hub).map(|i| (labels[hub].clone(), labels[i].clone())).collect();
            let tree = EmbeddedTree::from_parts(&terminals, &[], &edges, Norm::l1()).unwrap();
            let full = tree.to_full_form().unwrap();
            prop_assert!(full.is_full());
            prop_assert_eq!(full.total_length(), tree.total_length());
            for (l, pt) in &terminals {
                prop_assert_eq!(full.position_of(l), Some(*pt));
            }
            prop_assert_eq!(full.bead_count().bead_count, tree.bead_count().bead_count);
        }
    }
}
