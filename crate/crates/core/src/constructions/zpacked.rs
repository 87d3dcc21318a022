//! Z-packed canonical form of Euclidean full MSPTs.
//!
//! Every edge keeps its original ceiling `k_e` as a cap, so the bead count
//! can only stay put (or drop, which would refute minimality). Three
//! terminals: the Steiner bead moves to the shortest vertex of its level
//! region, a crossing of two integer circles. Four or more: the Steiner
//! edges are walked in Euler-tour order; each step `(u, v)` puts `u` on a
//! crossing of the integer circles around its other two neighbours, and
//! likewise `v`, keeping `|uv| <= k_uv`. After a step every edge at `u` or
//! `v` except `uv` is integer, and a later step can only break an edge it
//! re-pins, so the one edge that may stay fractional is the last one walked.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{circle_intersections, Point};
use crate::norms::Norm;
use crate::oracle::exact::meeting_candidates;
use crate::scalar::{ceil_eps, is_integer_eps, Scalar, DEGENERATE_EPS};
use crate::topology::{root_cherry, FullTopology};
use crate::tree::EmbeddedTree;

#[derive(Clone, Debug)]
pub struct ZPackedTree<T> {
    pub tree: EmbeddedTree<T>,
    pub integer_edges: Vec<(String, String)>,
    pub non_integer_edge: Option<(String, String)>,
    pub bead_count: i64,
    pub trace: Vec<ZPackStep<T>>,
}

/// One displacement of the canonicalizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct ZPackStep<T> {
    /// The Steiner edge being packed, or the lone Steiner bead for n = 3.
    pub edge: (String, String),
    pub moves: Vec<(String, Point<T>, Point<T>)>,
    pub bead_count: i64,
    pub integer_edges: usize,
    pub total_length: T,
}

#[derive(Clone, Debug, Default)]
pub struct ZPackOptions {
    /// Internal edge (by labels) left as the possibly fractional one; the
    /// default is the edge from the root cherry bead to its Steiner child.
    pub non_integer_edge: Option<(String, String)>,
}

struct State<'a, T> {
    top: &'a FullTopology,
    pos: Vec<Point<T>>,
    caps: Vec<i64>,
    beads: i64,
    trace: Vec<ZPackStep<T>>,
}

impl<T: Scalar> State<'_, T> {
    fn cap(&self, a: usize, b: usize) -> i64 {
        self.caps[self.top.edge_index(a, b).expect("adjacent nodes")]
    }

    fn tree(&self) -> Result<EmbeddedTree<T>> {
        EmbeddedTree::new((**self.top).clone(), self.pos.clone(), Norm::Euclidean)
    }

    fn integer_count(&self) -> usize {
        self.top.edges().iter().filter(|&&(a, b)| is_integer_eps(self.pos[a].dist(self.pos[b]))).count()
    }

    fn label(&self, v: usize) -> String {
        self.top.label(v).to_string()
    }

    /// Applies `moves`, re-checks bead count and bonds, and records the step.
    fn commit(&mut self, edge: (usize, usize), moves: Vec<(usize, Point<T>)>) -> Result<()> {
        let mut recorded = Vec::new();
        for (v, to) in moves {
            recorded.push((self.label(v), self.pos[v], to));
            self.pos[v] = to;
        }
        let tree = self.tree()?;
        let beads = tree.bead_count().bead_count;
        if beads != self.beads {
            return Err(Error::Construction(format!(
                "bead count changed from {} to {beads} while packing {}-{}; the input is not minimal",
                self.beads,
                self.label(edge.0),
                self.label(edge.1)
            )));
        }
        self.trace.push(ZPackStep {
            edge: (self.label(edge.0), self.label(edge.1)),
            moves: recorded,
            bead_count: beads,
            integer_edges: self.integer_count(),
            total_length: tree.total_length(),
        });
        check_bonds(&tree, self.trace.len())
    }
}

fn check_bonds<T: Scalar>(tree: &EmbeddedTree<T>, steps: usize) -> Result<()> {
    let bonds = tree.steiner_bonds()?;
    if let Some(&(e, f)) = bonds.first() {
        let t = tree.topology();
        let (a, b) = t.edges()[e];
        let (c, d) = t.edges()[f];
        let node = if a == c || a == d { a } else { b };
        debug_assert!(node == c || node == d);
        return Err(Error::BondEncountered { node: t.label(node).to_string(), trace_len: steps });
    }
    Ok(())
}

/// Crossings of the integer circles around the two neighbours of `u` other
/// than `v`.
fn corners<T: Scalar>(s: &State<T>, u: usize, v: usize) -> Vec<Point<T>> {
    let outer: Vec<usize> = s.top.neighbors(u).iter().copied().filter(|&w| w != v).collect();
    let r = |w: usize| T::from_i64(s.cap(u, w)).unwrap();
    circle_intersections(s.pos[outer[0]], r(outer[0]), s.pos[outer[1]], r(outer[1]))
}

fn local_length<T: Scalar>(s: &State<T>, u: usize, v: usize, x: Point<T>, y: Point<T>) -> T {
    let mut l = x.dist(y);
    for &w in s.top.neighbors(u) {
        if w != v {
            l = l + x.dist(s.pos[w]);
        }
    }
    for &w in s.top.neighbors(v) {
        if w != u {
            l = l + y.dist(s.pos[w]);
        }
    }
    l
}

fn outer_edges_integer<T: Scalar>(s: &State<T>, u: usize, v: usize) -> bool {
    [(u, v), (v, u)].iter().all(|&(a, b)| {
        s.top.neighbors(a).iter().filter(|&&w| w != b).all(|&w| is_integer_eps(s.pos[a].dist(s.pos[w])))
    })
}

fn pair_pack<T: Scalar>(s: &mut State<T>, u: usize, v: usize) -> Result<()> {
    if outer_edges_integer(s, u, v) {
        return Ok(());
    }
    let k = s.cap(u, v);
    let mut best: Option<(bool, T, Point<T>, Point<T>)> = None;
    for x in corners(s, u, v) {
        for y in corners(s, v, u) {
            let d = x.dist(y);
            if ceil_eps(d) > k {
                continue;
            }
            let key = (d <= T::lit(DEGENERATE_EPS), local_length(s, u, v, x, y));
            if best.as_ref().is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                best = Some((key.0, key.1, x, y));
            }
        }
    }
    match best {
        Some((_, _, x, y)) => s.commit((u, v), vec![(u, x), (v, y)]),
        None => Err(Error::Construction(format!(
            "no integer-circle placement packs {}-{} within its ceiling {k} ({} steps done)",
            s.label(u),
            s.label(v),
            s.trace.len()
        ))),
    }
}

/// Steiner edges in Euler-tour order from `start`, visiting `last` as the
/// final child so the walk ends on the edge `last -> start`.
fn euler_walk(top: &FullTopology, start: usize, last: usize) -> Vec<(usize, usize)> {
    fn visit(top: &FullTopology, u: usize, from: Option<usize>, last: Option<usize>, out: &mut Vec<(usize, usize)>) {
        let mut next: Vec<usize> =
            top.neighbors(u).iter().copied().filter(|&w| !top.is_terminal(w) && Some(w) != from).collect();
        next.sort_by_key(|&w| Some(w) == last);
        for w in next {
            out.push((u, w));
            visit(top, w, Some(u), None, out);
            out.push((w, u));
        }
    }
    let mut out = Vec::new();
    visit(top, start, None, Some(last), &mut out);
    out
}

fn pack_three<T: Scalar>(s: &mut State<T>) -> Result<()> {
    let st = s.top.steiners().next().expect("one Steiner bead");
    let nb: Vec<usize> = s.top.neighbors(st).to_vec();
    let anchors: Vec<Point<T>> = nb.iter().map(|&w| s.pos[w]).collect();
    let caps: Vec<i64> = nb.iter().map(|&w| s.cap(st, w)).collect();
    let scale = T::one().max(anchors.iter().map(|a| a.dist(anchors[0])).fold(T::zero(), T::max));
    let mut best: Option<(T, Point<T>)> = None;
    for x in meeting_candidates(&Norm::Euclidean, &anchors) {
        let d: Vec<T> = anchors.iter().map(|a| a.dist(x)).collect();
        if d.iter().zip(&caps).any(|(l, &k)| ceil_eps(*l) > k) {
            continue;
        }
        if d.iter().any(|l| *l <= T::lit(1e-9) * scale) || d.iter().filter(|l| is_integer_eps(**l)).count() < 2 {
            continue;
        }
        let length = d.iter().copied().sum::<T>();
        if best.as_ref().is_none_or(|b| length < b.0) {
            best = Some((length, x));
        }
    }
    match best {
        Some((_, x)) => s.commit((st, st), vec![(st, x)]),
        None => Err(Error::Construction("level region of the Steiner bead has no vertex off the terminals".into())),
    }
}

/// Canonicalizes with the default choice of fractional edge.
pub fn canonicalize_zpacked<T: Scalar>(mspt: &EmbeddedTree<T>) -> Result<ZPackedTree<T>> {
    canonicalize_zpacked_with(mspt, &ZPackOptions::default())
}

pub fn canonicalize_zpacked_with<T: Scalar>(mspt: &EmbeddedTree<T>, opts: &ZPackOptions) -> Result<ZPackedTree<T>> {
    if !mspt.norm().is_euclidean() {
        return Err(Error::Usage("Z-packed canonical forms are defined for the Euclidean norm only".into()));
    }
    let top = FullTopology::new(mspt.topology().clone())
        .map_err(|e| Error::Structural(format!("canonicalization needs a full topology: {e}")))?;
    let n = top.terminal_count();
    if n < 3 {
        return Err(Error::Structural(format!("a full topology with Steiner beads needs n >= 3, got {n}")));
    }
    let lengths = mspt.edge_lengths();
    if let Some(e) = lengths.iter().position(|l| *l <= T::lit(DEGENERATE_EPS)) {
        let (a, b) = top.edges()[e];
        return Err(Error::Structural(format!("edge {}-{} has zero length; input is not full", top.label(a), top.label(b))));
    }
    check_bonds(mspt, 0)?;
    let beads = mspt.bead_count().bead_count;
    let mut state = State { top: &top, pos: mspt.positions().to_vec(), caps: lengths.iter().map(|l| ceil_eps(*l)).collect(), beads, trace: vec![] };

    let fractional = if n == 3 {
        pack_three(&mut state)?;
        None
    } else {
        let (start, last) = match &opts.non_integer_edge {
            Some((a, b)) => {
                let ia = top.index_of(a).ok_or_else(|| Error::Usage(format!("unknown node {a}")))?;
                let ib = top.index_of(b).ok_or_else(|| Error::Usage(format!("unknown node {b}")))?;
                if top.is_terminal(ia) || top.is_terminal(ib) || top.edge_index(ia, ib).is_none() {
                    return Err(Error::Usage(format!("{a}-{b} is not an internal edge")));
                }
                (ia, ib)
            }
            None => {
                let r = root_cherry(&top).expect("full trees with n >= 3 have a cherry").bead;
                let c = top.neighbors(r).iter().copied().find(|&w| !top.is_terminal(w)).expect("n >= 4");
                (r, c)
            }
        };
        for (u, v) in euler_walk(&top, start, last) {
            pair_pack(&mut state, u, v)?;
        }
        Some((start, last))
    };

    let tree = state.tree()?;
    let mut integer_edges = Vec::new();
    let mut non_integer = Vec::new();
    for (e, &(a, b)) in top.edges().iter().enumerate() {
        let pair = (top.label(a).to_string(), top.label(b).to_string());
        if is_integer_eps(tree.edge_length(e)) {
            integer_edges.push(pair);
        } else {
            non_integer.push(pair);
        }
    }
    if integer_edges.len() < 2 * n - 4 {
        return Err(Error::Construction(format!("only {} integer edges, expected at least {}", integer_edges.len(), 2 * n - 4)));
    }
    if n >= 4 && non_integer.len() == 1 {
        let (a, b) = fractional.unwrap();
        let e = top.edge_index(a, b).unwrap();
        debug_assert!(!is_integer_eps(tree.edge_length(e)));
    }
    let bead_count = tree.bead_count().bead_count;
    debug_assert_eq!(bead_count, beads);
    Ok(ZPackedTree { tree, integer_edges, non_integer_edge: non_integer.into_iter().next(), bead_count, trace: state.trace })
}
