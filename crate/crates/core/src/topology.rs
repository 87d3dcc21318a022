//! Abstract Steiner topologies: labelled trees on terminals and Steiner nodes.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Terminal,
    Steiner,
}

/// A tree whose nodes are partitioned into terminals and Steiner nodes.
///
/// Invariants: labels are unique, the graph is a tree, and every Steiner node
/// has degree at least three. Degree-two beads never appear here.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    labels: Vec<String>,
    kinds: Vec<NodeKind>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(labels: Vec<String>, kinds: Vec<NodeKind>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Structural("empty topology".into()));
        }
        if kinds.len() != n {
            return Err(Error::Structural("label and kind lists differ in length".into()));
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(Error::Structural(format!("duplicate label {l:?}")));
            }
        }
        if !kinds.contains(&NodeKind::Terminal) {
            return Err(Error::Structural("topology has no terminals".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::Structural(format!(
                "a tree on {n} nodes has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::Structural(format!("edge ({a}, {b}) references a missing node")));
            }
            if a == b {
                return Err(Error::Structural(format!("self loop at {:?}", labels[a])));
            }
            if adjacency[a].contains(&b) {
                return Err(Error::Structural(format!("duplicate edge {:?}-{:?}", labels[a], labels[b])));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        if count != n {
            return Err(Error::Structural("topology is disconnected (or cyclic)".into()));
        }
        for i in 0..n {
            if kinds[i] == NodeKind::Steiner && adjacency[i].len() < 3 {
                return Err(Error::Structural(format!(
                    "Steiner node {:?} has degree {} (needs >= 3)",
                    labels[i],
                    adjacency[i].len()
                )));
            }
        }
        Ok(Topology { labels, kinds, edges, adjacency })
    }

    /// Builds a topology from label lists.
    pub fn from_labels<S: AsRef<str>>(terminals: &[S], steiners: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut labels: Vec<String> = terminals.iter().map(|s| s.as_ref().to_string()).collect();
        let mut kinds = vec![NodeKind::Terminal; labels.len()];
        labels.extend(steiners.iter().map(|s| s.as_ref().to_string()));
        kinds.resize(labels.len(), NodeKind::Steiner);
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut e = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| Error::Structural(format!("edge endpoint {:?} is not a node", a.as_ref())))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| Error::Structural(format!("edge endpoint {:?} is not a node", b.as_ref())))?;
            e.push((ia, ib));
        }
        Topology::new(labels, kinds, e)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Terminal).count()
    }

    pub fn steiner_count(&self) -> usize {
        self.node_count() - self.terminal_count()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.kinds[i]
    }

    pub fn is_terminal(&self, i: usize) -> bool {
        self.kinds[i] == NodeKind::Terminal
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&i| self.is_terminal(i))
    }

    pub fn steiners(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&i| !self.is_terminal(i))
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.iter().position(|&(u, v)| (u == a && v == b) || (u == b && v == a))
    }

    /// Every terminal has degree one and every Steiner node degree three.
    pub fn is_full(&self) -> bool {
        (0..self.node_count()).all(|i| match self.kinds[i] {
            NodeKind::Terminal => self.degree(i) == 1 || self.node_count() == 1,
            NodeKind::Steiner => self.degree(i) == 3,
        })
    }

    /// Edge labels as `(label, label)` pairs.
    pub fn edge_labels(&self) -> Vec<(String, String)> {
        self.edges.iter().map(|&(a, b)| (self.labels[a].clone(), self.labels[b].clone())).collect()
    }

    /// The terminal bipartitions induced by removing each edge, each side
    /// given as the sorted labels not containing the smallest terminal label.
    /// Two trees on the same terminals have equal split sets iff their
    /// topologies agree up to Steiner relabelling (for full topologies).
    pub fn splits(&self) -> BTreeSet<Vec<String>> {
        let mut terms: Vec<&str> = self.terminals().map(|i| self.label(i)).collect();
        terms.sort_unstable();
        let anchor = terms.first().copied().unwrap_or_default();
        let mut out = BTreeSet::new();
        for &(a, b) in &self.edges {
            let mut side = Vec::new();
            let mut stack = vec![b];
            let mut visited = vec![false; self.node_count()];
            visited[a] = true;
            visited[b] = true;
            while let Some(u) = stack.pop() {
                if self.is_terminal(u) {
                    side.push(self.labels[u].clone());
                }
                for &v in &self.adjacency[u] {
                    if !visited[v] {
                        visited[v] = true;
                        stack.push(v);
                    }
                }
            }
            if side.iter().any(|l| l == anchor) {
                let inside: BTreeSet<String> = side.into_iter().collect();
                side = terms.iter().filter(|l| !inside.contains(**l)).map(|l| l.to_string()).collect();
            }
            side.sort_unstable();
            out.insert(side);
        }
        out
    }

    /// Rewrites node labels, keeping the structure.
    pub fn relabeled(&self, labels: Vec<String>) -> Result<Self> {
        Topology::new(labels, self.kinds.clone(), self.edges.clone())
    }
}

/// A topology in full form: terminals of degree one, Steiner nodes of degree three.
#[derive(Clone, Debug, PartialEq)]
pub struct FullTopology(Topology);

impl FullTopology {
    pub fn new(t: Topology) -> Result<Self> {
        if !t.is_full() {
            return Err(Error::Structural(
                "topology is not full (terminals must have degree 1, Steiner nodes degree 3)".into(),
            ));
        }
        let n = t.terminal_count();
        if n >= 2 && t.steiner_count() != n - 2 {
            return Err(Error::Structural("full topology must have n - 2 Steiner nodes".into()));
        }
        Ok(FullTopology(t))
    }

    pub fn into_inner(self) -> Topology {
        self.0
    }
}

impl Deref for FullTopology {
    type Target = Topology;
    fn deref(&self) -> &Topology {
        &self.0
    }
}

impl TryFrom<Topology> for FullTopology {
    type Error = Error;
    fn try_from(t: Topology) -> Result<Self> {
        FullTopology::new(t)
    }
}

/// `(2n - 5)!!`, the number of full topologies on `n >= 3` labelled terminals
/// (and 1 for `n <= 2`).
pub fn full_topology_count(n: usize) -> u64 {
    if n <= 3 {
        return 1;
    }
    (1..=(2 * n - 5) as u64).step_by(2).product()
}

/// Edge lists of every full topology on `n` terminals.
///
/// Terminals are nodes `0..n`, Steiner nodes `n..2n-2`. Terminal `k >= 3` is
/// inserted by subdividing each existing edge in turn, which yields every
/// topology exactly once in a deterministic order.
pub fn full_topology_edge_lists(n: usize) -> Vec<Vec<(usize, usize)>> {
    match n {
        0 | 1 => return vec![Vec::new()],
        2 => return vec![vec![(0, 1)]],
        _ => {}
    }
    let base = vec![(0, n), (1, n), (2, n)];
    let mut out = Vec::with_capacity(full_topology_count(n) as usize);
    fn grow(edges: Vec<(usize, usize)>, k: usize, n: usize, out: &mut Vec<Vec<(usize, usize)>>) {
        if k == n {
            out.push(edges);
            return;
        }
        let s = n + (k - 2);
        for e in 0..edges.len() {
            let (u, v) = edges[e];
            let mut next = edges.clone();
            next[e] = (u, s);
            next.push((s, v));
            next.push((k, s));
            grow(next, k + 1, n, out);
        }
    }
    grow(base, 3, n, &mut out);
    out
}

/// The caterpillar on `t1..tn`: Steiner path `s1..s(n-2)`, with `t1, t2`
/// on `s1`, `t(k+1)` on `sk` and `t(n-1), tn` on the last Steiner node.
pub fn caterpillar_topology(n: usize) -> Result<FullTopology> {
    if n < 3 {
        return Err(Error::Usage(format!("a full caterpillar needs n >= 3, got {n}")));
    }
    let t: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
    let s: Vec<String> = (1..=n - 2).map(|i| format!("s{i}")).collect();
    let mut edges = vec![(t[0].clone(), s[0].clone())];
    for k in 0..n - 2 {
        edges.push((t[k + 1].clone(), s[k].clone()));
        if k + 1 < n - 2 {
            edges.push((s[k].clone(), s[k + 1].clone()));
        }
    }
    edges.push((t[n - 1].clone(), s[n - 3].clone()));
    FullTopology::new(Topology::from_labels(&t, &s, &edges)?)
}

/// Every full topology on the given terminal labels; Steiner nodes are
/// labelled `s1, s2, ...`.
pub fn full_topologies(terminals: &[String]) -> Vec<FullTopology> {
    let n = terminals.len();
    let mut labels = terminals.to_vec();
    let mut kinds = vec![NodeKind::Terminal; n];
    for i in 0..n.saturating_sub(2) {
        labels.push(format!("s{}", i + 1));
        kinds.push(NodeKind::Steiner);
    }
    full_topology_edge_lists(n)
        .into_iter()
        .map(|edges| {
            let t = Topology::new(labels.clone(), kinds.clone(), edges).expect("enumerated topology is a tree");
            FullTopology::new(t).expect("enumerated topology is full")
        })
        .collect()
}

/// A Steiner node adjacent to two terminals, with those terminals (`a < b` by label).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cherry {
    pub bead: usize,
    pub terminals: (usize, usize),
}

/// A full topology rooted at a cherry: the cherry's two terminals sit above
/// the cherry bead, which is the root of the remaining tree.
#[derive(Clone, Debug)]
pub struct Rooted {
    pub root: Cherry,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    /// Nodes in breadth-first order from the root bead (root terminals excluded).
    pub order: Vec<usize>,
}

/// Results of the structural queries on a full topology.
#[derive(Clone, Debug)]
pub struct Structure {
    pub cherries: Vec<Cherry>,
    pub is_caterpillar: bool,
    pub junctions: Vec<usize>,
    pub maximal_junctions: Vec<usize>,
    pub rooted_at: Option<Cherry>,
}

pub fn cherries(t: &FullTopology) -> Vec<Cherry> {
    let mut out = Vec::new();
    for s in t.steiners() {
        let mut terms: Vec<usize> = t.neighbors(s).iter().copied().filter(|&v| t.is_terminal(v)).collect();
        terms.sort_by(|a, b| t.label(*a).cmp(t.label(*b)));
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                out.push(Cherry { bead: s, terminals: (terms[i], terms[j]) });
            }
        }
    }
    out
}

/// Non-leaf nodes form a path (equivalently, no Steiner node has three
/// Steiner neighbours).
pub fn is_caterpillar(t: &Topology) -> bool {
    t.steiners().all(|s| t.neighbors(s).iter().filter(|&&v| !t.is_terminal(v)).count() <= 2)
}

/// The cherry whose terminal pair is lexicographically smallest.
pub fn root_cherry(t: &FullTopology) -> Option<Cherry> {
    cherries(t)
        .into_iter()
        .min_by(|a, b| {
            (t.label(a.terminals.0), t.label(a.terminals.1)).cmp(&(t.label(b.terminals.0), t.label(b.terminals.1)))
        })
}

pub fn rooted_at_cherry(t: &FullTopology) -> Option<Rooted> {
    let root = root_cherry(t)?;
    let n = t.node_count();
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut depth = vec![0usize; n];
    let mut visited = vec![false; n];
    let (ra, rb) = root.terminals;
    visited[ra] = true;
    visited[rb] = true;
    visited[root.bead] = true;
    let mut order = vec![root.bead];
    let mut queue = VecDeque::from([root.bead]);
    while let Some(u) = queue.pop_front() {
        for &v in t.neighbors(u) {
            if !visited[v] {
                visited[v] = true;
                parent[v] = Some(u);
                depth[v] = depth[u] + 1;
                children[u].push(v);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    Some(Rooted { root, parent, children, depth, order })
}

fn subtree_is_caterpillar(t: &Topology, rooted: &Rooted, top: usize) -> bool {
    // Non-leaves of the subtree {s} + {top} + desc(top) are the Steiner nodes
    // from `top` down. They form a path iff no Steiner below `top` has two
    // Steiner children.
    let mut stack = vec![top];
    while let Some(u) = stack.pop() {
        if t.is_terminal(u) {
            continue;
        }
        let steiner_children = rooted.children[u].iter().filter(|&&c| !t.is_terminal(c)).count();
        if u != top && steiner_children > 1 {
            return false;
        }
        stack.extend(rooted.children[u].iter().copied());
    }
    true
}

pub fn structure(t: &Topology) -> Result<Structure> {
    let full = FullTopology::new(t.clone())?;
    let cherries = cherries(&full);
    let caterpillar = is_caterpillar(&full);
    let rooted = rooted_at_cherry(&full);
    let mut junctions = Vec::new();
    let mut maximal = Vec::new();
    if let (false, Some(r)) = (caterpillar, rooted.as_ref()) {
        let is_junction = |s: usize| -> bool {
            if full.is_terminal(s) || s == r.root.bead || r.children[s].len() != 2 {
                return false;
            }
            r.children[s].iter().all(|&c| subtree_is_caterpillar(&full, r, c))
        };
        for s in full.steiners() {
            if is_junction(s) {
                junctions.push(s);
                let parent_is_junction = r.parent[s].map(is_junction).unwrap_or(false);
                if !parent_is_junction {
                    maximal.push(s);
                }
            }
        }
    }
    Ok(Structure {
        cherries,
        is_caterpillar: caterpillar,
        junctions,
        maximal_junctions: maximal,
        rooted_at: rooted.map(|r| r.root),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn caterpillars() {
        for n in 3..=12 {
            let t = caterpillar_topology(n).unwrap();
            assert_eq!(t.terminal_count(), n);
            assert_eq!(t.edges().len(), 2 * n - 3);
            assert!(is_caterpillar(&t));
        }
        assert!(caterpillar_topology(2).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(full_topology_edge_lists(3).len(), 1);
        assert_eq!(full_topology_edge_lists(4).len(), 3);
        assert_eq!(full_topology_edge_lists(5).len(), 15);
        assert_eq!(full_topology_edge_lists(6).len(), 105);
        assert_eq!(full_topology_count(8), 10395);
        for n in 2..=7 {
            for t in full_topologies(&names(n)) {
                assert_eq!(t.edges().len(), 2 * n - 3);
                assert_eq!(t.steiner_count(), n - 2);
            }
        }
    }

    #[test]
    fn enumerated_topologies_are_distinct() {
        let all = full_topologies(&names(6));
        let mut keys: Vec<Vec<(usize, usize)>> = all
            .iter()
            .map(|t| {
                // canonical key: for each terminal pair, whether they share a Steiner; use split sets
                let mut e: Vec<(usize, usize)> = t.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
                e.sort();
                e
            })
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 105);
    }

    #[test]
    fn every_full_topology_has_two_cherries() {
        for n in 4..=7 {
            for t in full_topologies(&names(n)) {
                let c = cherries(&t);
                let beads: std::collections::BTreeSet<usize> = c.iter().map(|c| c.bead).collect();
                assert!(beads.len() >= 2, "n={n}");
            }
        }
        // n = 3: the single bead is a cherry three ways
        assert_eq!(cherries(&full_topologies(&names(3))[0]).len(), 3);
    }

    #[test]
    fn validation_errors() {
        // cycle: 3 nodes 3 edges
        assert!(Topology::from_labels(&["a", "b", "c"], &[], &[("a", "b"), ("b", "c"), ("c", "a")]).is_err());
        // disconnected
        assert!(Topology::from_labels(&["a", "b", "c", "d"], &[], &[("a", "b"), ("c", "d"), ("a", "b")]).is_err());
        // degree-2 Steiner
        assert!(Topology::from_labels(&["a", "b"], &["s"], &[("a", "s"), ("s", "b")]).is_err());
        assert!(Topology::from_labels(&["a", "b", "c"], &[], &[("a", "b"), ("b", "c")]).is_ok());
    }

    #[test]
    fn four_terminal_structure() {
        let t = &full_topologies(&names(4))[0];
        let s = structure(t).unwrap();
        let beads: std::collections::BTreeSet<usize> = s.cherries.iter().map(|c| c.bead).collect();
        assert_eq!(beads.len(), 2);
        assert!(s.is_caterpillar);
        assert!(s.maximal_junctions.is_empty());
    }

    fn balanced8() -> Topology {
        Topology::from_labels(
            &["t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8"],
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("t1", "a"),
                ("t2", "a"),
                ("t3", "b"),
                ("t4", "b"),
                ("a", "c"),
                ("b", "c"),
                ("c", "d"),
                ("t5", "e"),
                ("t6", "e"),
                ("t7", "f"),
                ("t8", "f"),
                ("e", "d"),
                ("f", "d"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn balanced_eight_terminal_structure() {
        let t = balanced8();
        let s = structure(&t).unwrap();
        assert_eq!(s.cherries.len(), 4);
        assert!(!s.is_caterpillar);
        let labels: Vec<&str> = s.maximal_junctions.iter().map(|&i| t.label(i)).collect();
        assert_eq!(labels, vec!["c"]);
        let all: Vec<&str> = s.junctions.iter().map(|&i| t.label(i)).collect();
        assert_eq!(all, vec!["b", "c", "d", "e", "f"]);
        let root = s.rooted_at.unwrap();
        assert_eq!(t.label(root.bead), "a");
    }

    #[test]
    fn caterpillar_has_no_junctions() {
        let t = Topology::from_labels(
            &["t1", "t2", "t3", "t4", "t5", "t6"],
            &["s1", "s2", "s3", "s4"],
            &[
                ("t1", "s1"),
                ("t2", "s1"),
                ("s1", "s2"),
                ("t3", "s2"),
                ("s2", "s3"),
                ("t4", "s3"),
                ("s3", "s4"),
                ("t5", "s4"),
                ("t6", "s4"),
            ],
        )
        .unwrap();
        let s = structure(&t).unwrap();
        assert!(s.is_caterpillar);
        assert!(s.maximal_junctions.is_empty());
        assert_eq!(s.cherries.len(), 2);
    }

    #[test]
    fn structure_rejects_non_full() {
        let t = Topology::from_labels(&["a", "b", "c"], &[], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(matches!(structure(&t), Err(Error::Structural(_))));
    }
}
