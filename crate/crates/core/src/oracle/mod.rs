//! Bead-count optimization: the SMT and MST heuristics, exact small-n
//! oracles, a local-search oracle for larger n, and bound reports.
//!
//! Every tree on `n` terminals splits into a full topology whose Steiner
//! nodes may coincide with each other or with terminals, at the same bead
//! count. The oracles therefore search full topologies with free positions.

pub mod disks;
pub mod exact;
pub mod search;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::{classify, Norm};
use crate::scalar::{is_integer_eps, Scalar};
use crate::smt::{smt, SmtOptions, SmtResult};
use crate::topology::{full_topology_edge_lists, NodeKind, Topology};
use crate::tree::{BeadReport, Beading, EmbeddedTree};

use exact::{best_meeting_point, best_pair_placement, TieBreak};
use search::{search_fixed_topology, Budget};

/// Default multi-start seed.
pub const DEFAULT_SEED: u64 = 0xBEAD_5EED;
/// Default cap on evaluated placements.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicKind {
    Smt,
    Mst,
}

#[derive(Clone, Debug)]
pub struct HeuristicResult<T> {
    pub tree: EmbeddedTree<T>,
    pub beading: Beading<T>,
    pub report: BeadReport<T>,
    pub heuristic_name: HeuristicKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleStatus {
    ExactN3,
    ExhaustiveVerified,
    BestEffort,
}

impl OracleStatus {
    pub fn is_verified(self) -> bool {
        self != OracleStatus::BestEffort
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchTrace {
    pub topologies: usize,
    pub placements: u64,
    pub starts: usize,
    pub budget_exhausted: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct OracleResult<T> {
    pub best_tree: EmbeddedTree<T>,
    pub best_beads: i64,
    pub status: OracleStatus,
    pub search_trace: SearchTrace,
}

fn terminal_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("t{i}")).collect()
}

fn heuristic_from_tree<T: Scalar>(tree: EmbeddedTree<T>, kind: HeuristicKind) -> HeuristicResult<T> {
    let beading = tree.beading();
    let report = tree.bead_count();
    HeuristicResult { tree, beading, report, heuristic_name: kind }
}

/// Beads the Steiner minimal tree. Capacity follows the SMT solver.
pub fn smt_heuristic<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>) -> Result<HeuristicResult<T>> {
    let r = smt(norm, terminals, &SmtOptions::default())?;
    Ok(heuristic_from_tree(r.tree, HeuristicKind::Smt))
}

/// Minimum spanning tree under `norm` (Prim, ties to the lower index).
pub fn minimum_spanning_tree<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>) -> Result<EmbeddedTree<T>> {
    let n = terminals.len();
    if n < 2 {
        return Err(Error::Usage(format!("need at least 2 terminals, got {n}")));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![(T::infinity(), 0usize); n];
    best[0] = (T::zero(), 0);
    let mut edges = Vec::with_capacity(n - 1);
    for step in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].0.partial_cmp(&best[b].0).unwrap().then(a.cmp(&b)))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            edges.push((best[u].1, u));
        }
        for v in 0..n {
            if !in_tree[v] {
                let d = norm.distance(terminals[u], terminals[v]);
                if d < best[v].0 {
                    best[v] = (d, u);
                }
            }
        }
    }
    let top = Topology::new(terminal_labels(n), vec![NodeKind::Terminal; n], edges)?;
    EmbeddedTree::new(top, terminals.to_vec(), norm.clone())
}

pub fn mst_heuristic<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>) -> Result<HeuristicResult<T>> {
    Ok(heuristic_from_tree(minimum_spanning_tree(terminals, norm)?, HeuristicKind::Mst))
}

fn full_tree_from_edges<T: Scalar>(
    n: usize,
    edges: Vec<(usize, usize)>,
    positions: Vec<Point<T>>,
    norm: &Norm<T>,
) -> Result<EmbeddedTree<T>> {
    let mut labels = terminal_labels(n);
    let mut kinds = vec![NodeKind::Terminal; n];
    for i in 0..n.saturating_sub(2) {
        labels.push(format!("s{}", i + 1));
        kinds.push(NodeKind::Steiner);
    }
    EmbeddedTree::new(Topology::new(labels, kinds, edges)?, positions, norm.clone())
}

/// Exact optimum for three terminals in any supported norm.
///
/// The only full topology is a star, so the optimum is the best single
/// point; `prefer_full` breaks ties toward a Steiner point off the terminals.
pub fn mspt_exact3_with<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>, prefer_full: bool) -> Result<OracleResult<T>> {
    if terminals.len() != 3 {
        return Err(Error::Usage(format!("exact three-terminal oracle needs n = 3, got {}", terminals.len())));
    }
    let tie = if prefer_full { TieBreak::PreferFull } else { TieBreak::Shortest };
    let (m, placements) = best_meeting_point(norm, terminals, tie);
    let mut pos = terminals.to_vec();
    pos.push(m.point);
    let tree = full_tree_from_edges(3, vec![(0, 3), (1, 3), (2, 3)], pos, norm)?;
    Ok(OracleResult {
        best_beads: m.cost - 2,
        best_tree: tree,
        status: OracleStatus::ExactN3,
        search_trace: SearchTrace { topologies: 1, placements, starts: 1, budget_exhausted: false, notes: vec![] },
    })
}

pub fn mspt_exact3<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>) -> Result<OracleResult<T>> {
    mspt_exact3_with(terminals, norm, false)
}

/// The three full topologies on four terminals as `(a, b | c, d)` pairings.
pub const PAIRINGS4: [[usize; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];

fn pair_tree<T: Scalar>(terminals: &[Point<T>], pairing: [usize; 4], a: Point<T>, b: Point<T>, norm: &Norm<T>) -> Result<EmbeddedTree<T>> {
    let [p, q, r, s] = pairing;
    let mut pos = terminals.to_vec();
    pos.push(a);
    pos.push(b);
    full_tree_from_edges(4, vec![(p, 4), (q, 4), (4, 5), (r, 5), (s, 5)], pos, norm)
}

fn best_of<T: Scalar>(trees: impl IntoIterator<Item = EmbeddedTree<T>>) -> Option<(i64, EmbeddedTree<T>)> {
    trees
        .into_iter()
        .map(|t| (t.bead_count().bead_count, t))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_length().partial_cmp(&b.1.total_length()).unwrap()))
}

/// Trees from both heuristics, where they apply.
fn heuristic_trees<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>) -> Vec<EmbeddedTree<T>> {
    let mut out = Vec::new();
    if let Ok(h) = smt_heuristic(terminals, norm) {
        out.push(h.tree);
    }
    if let Ok(h) = mst_heuristic(terminals, norm) {
        out.push(h.tree);
    }
    out
}

/// Exact Euclidean optimum for four terminals: for each pairing, integer
/// radii around the terminals give two lenses whose distance fixes the middle
/// edge. Falls back to `BestEffort` when the budget runs out.
pub fn mspt_exact4<T: Scalar>(terminals: &[Point<T>], budget: u64) -> Result<OracleResult<T>> {
    if terminals.len() != 4 {
        return Err(Error::Usage(format!("exact four-terminal oracle needs n = 4, got {}", terminals.len())));
    }
    let norm = Norm::Euclidean;
    let (mut beads, mut tree) = best_of(heuristic_trees(terminals, &norm)).ok_or_else(|| Error::Usage("no heuristic tree".into()))?;
    let mut trace = SearchTrace { topologies: 3, ..Default::default() };
    let mut complete = true;
    for pairing in PAIRINGS4 {
        let anchors = pairing.map(|i| terminals[i]);
        let remaining = budget.saturating_sub(trace.placements);
        let s = best_pair_placement(anchors, beads + 3, remaining);
        trace.placements += s.evaluated;
        complete &= s.complete;
        if let Some(best) = s.best {
            let candidate = pair_tree(terminals, pairing, best.a, best.b, &norm)?;
            let b = candidate.bead_count().bead_count;
            if b < beads {
                beads = b;
                tree = candidate;
            }
        }
    }
    trace.budget_exhausted = !complete;
    let status = if complete { OracleStatus::ExhaustiveVerified } else { OracleStatus::BestEffort };
    Ok(OracleResult { best_tree: tree, best_beads: beads, status, search_trace: trace })
}

/// Multi-start local search on one topology over the given terminals
/// (listed in the order of the topology's terminal nodes).
pub fn minimize_beads_fixed_topology<T: Scalar>(
    topology: &Topology,
    terminals: &[Point<T>],
    norm: &Norm<T>,
    seed: u64,
    budget: u64,
) -> Result<EmbeddedTree<T>> {
    if terminals.len() != topology.terminal_count() {
        return Err(Error::Structural(format!(
            "topology has {} terminals but {} positions were given",
            topology.terminal_count(),
            terminals.len()
        )));
    }
    let mut pos = vec![Point::origin(); topology.node_count()];
    for (i, t) in topology.terminals().zip(terminals) {
        pos[i] = *t;
    }
    let mut b = Budget::new(budget);
    let r = search_fixed_topology(topology, norm, &pos, 4, seed, &mut b);
    EmbeddedTree::new(topology.clone(), r.positions, norm.clone())
}

/// Best tree found over all full topologies (and both heuristics).
///
/// `n = 2` and Euclidean `n = 4` are exact, `n = 3` is exact in any norm,
/// everything else is a local search reported as `BestEffort`.
pub fn mspt_search<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>, budget: u64, seed: u64) -> Result<OracleResult<T>> {
    let n = terminals.len();
    if n < 2 {
        return Err(Error::Usage(format!("need at least 2 terminals, got {n}")));
    }
    if n == 2 {
        let tree = minimum_spanning_tree(terminals, norm)?;
        return Ok(OracleResult {
            best_beads: tree.bead_count().bead_count,
            best_tree: tree,
            status: OracleStatus::ExhaustiveVerified,
            search_trace: SearchTrace { topologies: 1, placements: 1, starts: 1, budget_exhausted: false, notes: vec![] },
        });
    }
    if n == 3 {
        return mspt_exact3(terminals, norm);
    }
    if n == 4 && norm.is_euclidean() {
        let exact = mspt_exact4(terminals, budget)?;
        if exact.status.is_verified() {
            return Ok(exact);
        }
    }
    if n > 10 {
        return Err(Error::Capacity(format!("bead search supports n <= 10 terminals, got {n}")));
    }
    let lists = full_topology_edge_lists(n);
    let per_topology = (budget / lists.len() as u64).max(1);
    let results: Vec<(usize, search::FixedSearch<T>)> = lists
        .par_iter()
        .enumerate()
        .map(|(rank, edges)| {
            let top = full_tree_from_edges(n, edges.clone(), vec![Point::origin(); 2 * n - 2], norm)
                .expect("enumerated topology is valid")
                .topology()
                .clone();
            let mut pos = terminals.to_vec();
            pos.resize(2 * n - 2, Point::origin());
            let mut b = Budget::new(per_topology);
            let r = search_fixed_topology(&top, norm, &pos, 4, seed.wrapping_add(rank as u64), &mut b);
            (rank, r)
        })
        .collect();
    let mut trace = SearchTrace { topologies: lists.len(), ..Default::default() };
    let mut best: Option<(i64, T, usize)> = None;
    for (rank, r) in &results {
        trace.starts += r.starts;
        trace.budget_exhausted |= r.budget_exhausted;
        let better = match best {
            None => true,
            Some((c, l, _)) => r.ceiling_sum < c || (r.ceiling_sum == c && r.length < l),
        };
        if better {
            best = Some((r.ceiling_sum, r.length, *rank));
        }
    }
    trace.placements = per_topology.min(budget) * lists.len() as u64;
    let (_, _, rank) = best.unwrap();
    let searched = full_tree_from_edges(n, lists[rank].clone(), results[rank].1.positions.clone(), norm)?;
    let mut candidates = heuristic_trees(terminals, norm);
    candidates.insert(0, searched);
    let (beads, tree) = best_of(candidates).unwrap();
    trace.notes.push("local search over full topologies; optimality not certified".into());
    Ok(OracleResult { best_tree: tree, best_beads: beads, status: OracleStatus::BestEffort, search_trace: trace })
}

/// Heuristic-versus-oracle comparison with every applicable bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub n: usize,
    pub norm_class: String,
    pub smt_beads: i64,
    pub mst_beads: i64,
    pub oracle_beads: i64,
    pub oracle_status: OracleStatus,
    pub gap: i64,
    /// Integer-length edges of the SMT's full form (zero-length included).
    pub j: usize,
    /// Full components of the SMT.
    pub c: usize,
    pub non_integer_edges: usize,
    #[serde(rename = "bound2n4")]
    pub bound_2n4: bool,
    #[serde(rename = "boundC")]
    pub bound_c: bool,
    pub eq_corollary: bool,
    pub para_bound: Option<bool>,
    /// `1 + (2n - 4) / oracleBeads`, when the oracle uses at least one bead.
    pub ratio_bound: Option<f64>,
    pub ratio: Option<f64>,
}

impl BoundReport {
    /// True when some applicable bound fails.
    pub fn has_violation(&self) -> bool {
        !self.bound_2n4 || !self.bound_c || !self.eq_corollary || self.para_bound == Some(false)
    }
}

/// Evaluates the bounds for one instance given the SMT and the oracle.
pub fn bound_report_from<T: Scalar>(
    terminals: &[Point<T>],
    norm: &Norm<T>,
    smt_result: &SmtResult<T>,
    oracle: &OracleResult<T>,
) -> Result<BoundReport> {
    let n = terminals.len() as i64;
    let smt_report = smt_result.tree.bead_count();
    let contracted = smt_result.contracted()?;
    let c = contracted.bead_count().full_component_count;
    let j = smt_report.integer_edge_count;
    let non_integer = smt_report.per_edge_ceilings.iter().filter(|e| !is_integer_eps(e.length)).count();
    let mst_beads = mst_heuristic(terminals, norm)?.report.bead_count;
    let gap = smt_report.bead_count - oracle.best_beads;
    let class = classify(norm);
    let para = if class.is_parallelogram() && n == 3 { Some(gap <= 1) } else { None };
    let (ratio_bound, ratio) = if oracle.best_beads > 0 {
        (
            Some(1.0 + (2 * n - 4) as f64 / oracle.best_beads as f64),
            Some(smt_report.bead_count as f64 / oracle.best_beads as f64),
        )
    } else {
        (None, None)
    };
    Ok(BoundReport {
        n: terminals.len(),
        norm_class: class.tag().to_string(),
        smt_beads: smt_report.bead_count,
        mst_beads,
        oracle_beads: oracle.best_beads,
        oracle_status: oracle.status,
        gap,
        j,
        c,
        non_integer_edges: non_integer,
        bound_2n4: gap <= (2 * n - 4 - j as i64).max(0),
        bound_c: gap <= 2 * n - c as i64 - 3,
        eq_corollary: non_integer > 1 || gap == 0,
        para_bound: para,
        ratio_bound,
        ratio,
    })
}

/// Runs the SMT heuristic and the oracle, then evaluates the bounds.
pub fn bound_report<T: Scalar>(terminals: &[Point<T>], norm: &Norm<T>, budget: u64, seed: u64) -> Result<BoundReport> {
    let s = smt(norm, terminals, &SmtOptions::default())?;
    let oracle = mspt_search(terminals, norm, budget, seed)?;
    let report = bound_report_from(terminals, norm, &s, &oracle)?;
    if report.has_violation() {
        log::error!("bound violated: {report:?}");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    pub(crate) fn wide_instance() -> Vec<Point<f64>> {
        vec![Point::polar(0.0) * 5.1, p(0.0, 0.0), Point::polar(2.0 * PI / 3.0) * 5.1]
    }

    #[test]
    fn heuristics_on_wide_instance() {
        let t = wide_instance();
        assert_eq!(smt_heuristic(&t, &Norm::Euclidean).unwrap().report.bead_count, 10);
        assert_eq!(mst_heuristic(&t, &Norm::Euclidean).unwrap().report.bead_count, 10);
        let o = mspt_exact3(&t, &Norm::Euclidean).unwrap();
        assert_eq!(o.best_beads, 9);
        assert_eq!(o.best_tree.bead_count().bead_count, 9);
        let r = bound_report(&t, &Norm::Euclidean, DEFAULT_BUDGET, DEFAULT_SEED).unwrap();
        assert_eq!(r.gap, 1);
        assert!(r.bound_2n4 && r.bound_c && r.eq_corollary);
    }

    #[test]
    fn heuristic_examples() {
        let r = 1.2 / 3f64.sqrt();
        let eq: Vec<Point<f64>> = (0..3).map(|k| Point::polar(k as f64 * 2.0 * PI / 3.0) * r).collect();
        assert_eq!(smt_heuristic(&eq, &Norm::Euclidean).unwrap().report.bead_count, 1);
        assert_eq!(mst_heuristic(&eq, &Norm::Euclidean).unwrap().report.bead_count, 2);
        assert_eq!(mspt_exact3(&eq, &Norm::Euclidean).unwrap().best_beads, 1);
        let close = [p(0.0, 0.0), p(0.8, 0.0)];
        assert_eq!(smt_heuristic(&close, &Norm::Euclidean).unwrap().report.bead_count, 0);
        let col = [p(0.0, 0.0), p(0.0, 1.0), p(0.0, 2.0)];
        assert_eq!(mst_heuristic(&col, &Norm::Euclidean).unwrap().report.bead_count, 0);
        let unit = [p(0.0, 0.0), p(0.5, 0.5), p(0.9, 0.1)];
        assert_eq!(mspt_exact3(&unit, &Norm::Euclidean).unwrap().best_beads, 0);
        for h in [smt_heuristic(&eq, &Norm::Euclidean).unwrap(), mst_heuristic(&eq, &Norm::Euclidean).unwrap()] {
            for (a, b) in &h.beading.segments {
                assert!(a.dist(*b) <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn two_terminals() {
        let o = mspt_search(&[p(0.0, 0.0), p(2.5, 0.0)], &Norm::Euclidean, 10, DEFAULT_SEED).unwrap();
        assert_eq!(o.best_beads, 2);
        assert_eq!(o.best_tree.topology().edges().len(), 1);
    }

    #[test]
    fn path_topology_is_a_no_op() {
        let top = Topology::from_labels(&["a", "b", "c"], &[], &[("a", "b"), ("b", "c")]).unwrap();
        let t = [p(0.0, 0.0), p(1.5, 0.0), p(1.5, 2.2)];
        let tree = minimize_beads_fixed_topology(&top, &t, &Norm::Euclidean, DEFAULT_SEED, 1000).unwrap();
        assert_eq!(tree.bead_count().bead_count, 1 + 2);
        assert_eq!(tree.positions(), &t);
    }

    #[test]
    fn exact4_dominates_heuristics() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let t: Vec<Point<f64>> = (0..4).map(|_| p(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0))).collect();
            let o = mspt_search(&t, &Norm::Euclidean, DEFAULT_BUDGET, DEFAULT_SEED).unwrap();
            assert_eq!(o.status, OracleStatus::ExhaustiveVerified);
            assert_eq!(o.best_tree.bead_count().bead_count, o.best_beads);
            let s = smt_heuristic(&t, &Norm::Euclidean).unwrap().report.bead_count;
            let m = mst_heuristic(&t, &Norm::Euclidean).unwrap().report.bead_count;
            assert!(o.best_beads <= s.min(m));
        }
    }
}
