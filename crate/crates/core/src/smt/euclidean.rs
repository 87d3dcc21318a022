//! Euclidean Steiner minimal trees by full-topology enumeration and
//! Fermat-point relaxation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::Norm;
use crate::scalar::{Scalar, DEGENERATE_EPS};
use crate::smt::fermat::{fermat_point, geometric_median};
use crate::smt::SmtResult;
use crate::topology::{full_topology_edge_lists, FullTopology, NodeKind, Topology};
use crate::tree::EmbeddedTree;

#[derive(Clone, Debug)]
pub struct SmtOptions<T> {
    /// Largest number of distinct terminals accepted.
    pub max_n: usize,
    /// Stop when no Steiner point moves farther than this (times `max(1, diam)`).
    pub tolerance: T,
    pub max_iterations: usize,
    pub parallel: bool,
}

impl<T: Scalar> Default for SmtOptions<T> {
    fn default() -> Self {
        SmtOptions { max_n: 8, tolerance: T::lit(1e-10), max_iterations: 100_000, parallel: true }
    }
}

fn diameter<T: Scalar>(pts: &[Point<T>]) -> T {
    let mut d = T::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(pts[i].dist(pts[j]));
        }
    }
    d
}

fn tree_length<T: Scalar>(edges: &[(usize, usize)], pos: &[Point<T>]) -> T {
    edges.iter().map(|&(a, b)| pos[a].dist(pos[b])).sum()
}

/// Solves the harmonic (neighbour-average) embedding of the Steiner nodes.
fn harmonic_init<T: Scalar>(top: &Topology, pos: &mut [Point<T>]) {
    let steiners: Vec<usize> = top.steiners().collect();
    let m = steiners.len();
    if m == 0 {
        return;
    }
    let mut slot = vec![usize::MAX; top.node_count()];
    for (k, &s) in steiners.iter().enumerate() {
        slot[s] = k;
    }
    // [A | bx | by] with A the Steiner block of the Laplacian.
    let mut a = vec![vec![T::zero(); m + 2]; m];
    for (k, &s) in steiners.iter().enumerate() {
        a[k][k] = T::from_usize_lossy(top.degree(s));
        for &v in top.neighbors(s) {
            if top.is_terminal(v) {
                a[k][m] = a[k][m] + pos[v].x;
                a[k][m + 1] = a[k][m + 1] + pos[v].y;
            } else {
                a[k][slot[v]] = a[k][slot[v]] - T::one();
            }
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for row in 0..m {
            if row != col {
                let f = a[row][col] / p;
                if f != T::zero() {
                    for c in col..m + 2 {
                        let v = a[col][c];
                        a[row][c] = a[row][c] - f * v;
                    }
                }
            }
        }
    }
    for (k, &s) in steiners.iter().enumerate() {
        pos[s] = Point::new(a[k][m] / a[k][k], a[k][m + 1] / a[k][k]);
    }
}

fn gradient<T: Scalar>(top: &Topology, pos: &[Point<T>]) -> Vec<Point<T>> {
    let mut g = vec![Point::origin(); top.node_count()];
    let tiny = T::lit(1e-14);
    for &(a, b) in top.edges() {
        let d = pos[a] - pos[b];
        let l = d.length();
        if l > tiny {
            let u = d * (T::one() / l);
            if !top.is_terminal(a) {
                g[a] = g[a] + u;
            }
            if !top.is_terminal(b) {
                g[b] = g[b] - u;
            }
        }
    }
    g
}

/// Golden-section search along the negative gradient; returns whether the
/// length decreased.
fn gradient_line_search<T: Scalar>(top: &Topology, pos: &mut [Point<T>], scale: T) -> bool {
    let g = gradient(top, pos);
    let gn = g.iter().map(|v| v.norm_sq()).sum::<T>().sqrt();
    if gn <= T::lit(1e-14) {
        return false;
    }
    let at = |t: T| -> Vec<Point<T>> { pos.iter().zip(&g).map(|(p, v)| *p - *v * t).collect() };
    let f = |t: T| tree_length(top.edges(), &at(t));
    let (mut lo, mut hi) = (T::zero(), scale / gn);
    let r = T::lit(0.618_033_988_749_894_9);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    let next = at((lo + hi) / T::lit(2.0));
    if tree_length(top.edges(), &next) < tree_length(top.edges(), pos) {
        pos.copy_from_slice(&next);
        true
    } else {
        false
    }
}

/// Gauss-Seidel Fermat re-placement of every Steiner node until the largest
/// move drops below tolerance.
fn gauss_seidel<T: Scalar>(top: &Topology, pos: &mut [Point<T>], opts: &SmtOptions<T>, scale: T) {
    let tol = opts.tolerance * scale;
    let steiners: Vec<usize> = top.steiners().collect();
    let mut prev = T::infinity();
    let mut stalled = 0usize;
    for _ in 0..opts.max_iterations {
        let mut max_move = T::zero();
        for &s in &steiners {
            let nb = top.neighbors(s);
            let next = fermat_point(pos[nb[0]], pos[nb[1]], pos[nb[2]]);
            max_move = max_move.max(next.dist(pos[s]));
            pos[s] = next;
        }
        if max_move < tol {
            return;
        }
        if max_move >= prev {
            stalled += 1;
        } else {
            stalled = 0;
        }
        prev = max_move;
        if stalled >= 100 {
            gradient_line_search(top, pos, scale);
            stalled = 0;
            prev = T::infinity();
        }
    }
}

/// Moves blocks of Steiner nodes joined by (near) zero-length edges to the
/// geometric median of their outside neighbours; single-node relaxation
/// cannot leave such clusters on its own.
fn repair_clusters<T: Scalar>(top: &Topology, pos: &mut [Point<T>], scale: T) -> bool {
    let thr = T::lit(1e-7) * scale;
    let n = top.node_count();
    let short: Vec<(usize, usize)> =
        top.edges().iter().copied().filter(|&(a, b)| pos[a].dist(pos[b]) <= thr).collect();
    if short.is_empty() {
        return false;
    }
    let current = tree_length(top.edges(), pos);
    let mut best_gain = T::lit(1e-12) * scale;
    let mut best_move: Option<(Vec<usize>, Point<T>)> = None;
    // Components of the short-edge forest that can move as a block: each side
    // of every short edge plus every whole component.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let side = |from: usize, blocked: Option<usize>| -> Vec<usize> {
        let mut seen = vec![false; n];
        if let Some(b) = blocked {
            seen[b] = true;
        }
        seen[from] = true;
        let mut stack = vec![from];
        let mut out = vec![];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &(a, b) in &short {
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        out
    };
    for &(a, b) in &short {
        blocks.push(side(a, Some(b)));
        blocks.push(side(b, Some(a)));
        blocks.push(side(a, None));
    }
    for block in blocks {
        if block.iter().any(|&v| top.is_terminal(v)) {
            continue;
        }
        let mut outside = Vec::new();
        for &(a, b) in top.edges() {
            let (ia, ib) = (block.contains(&a), block.contains(&b));
            if ia && !ib {
                outside.push(pos[b]);
            } else if ib && !ia {
                outside.push(pos[a]);
            }
        }
        let target = geometric_median(&outside);
        let mut trial = pos.to_vec();
        for &v in &block {
            trial[v] = target;
        }
        let gain = current - tree_length(top.edges(), &trial);
        if gain > best_gain {
            best_gain = gain;
            best_move = Some((block, target));
        }
    }
    match best_move {
        Some((block, target)) => {
            for v in block {
                pos[v] = target;
            }
            true
        }
        None => false,
    }
}

/// Relaxes the Steiner positions of a full topology in place; terminal
/// positions are fixed. Returns the resulting length.
pub fn relax_topology<T: Scalar>(top: &Topology, pos: &mut [Point<T>], opts: &SmtOptions<T>) -> T {
    let terms: Vec<Point<T>> = top.terminals().map(|i| pos[i]).collect();
    let scale = T::one().max(diameter(&terms));
    harmonic_init(top, pos);
    gauss_seidel(top, pos, opts, scale);
    for _ in 0..50 {
        if !repair_clusters(top, pos, scale) {
            break;
        }
        gauss_seidel(top, pos, opts, scale);
    }
    tree_length(top.edges(), pos)
}

fn labels(n: usize) -> (Vec<String>, Vec<NodeKind>) {
    let mut l: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
    let mut k = vec![NodeKind::Terminal; n];
    for i in 0..n.saturating_sub(2) {
        l.push(format!("s{}", i + 1));
        k.push(NodeKind::Steiner);
    }
    (l, k)
}

/// Removes terminals within `1e-12 * max(1, diam)` of an earlier one; returns
/// the kept points and, per input index, the kept index it maps to.
fn collapse_duplicates<T: Scalar>(terminals: &[Point<T>]) -> (Vec<Point<T>>, Vec<usize>) {
    let tol = T::lit(1e-12) * T::one().max(diameter(terminals));
    let mut kept: Vec<Point<T>> = Vec::new();
    let mut map = Vec::with_capacity(terminals.len());
    for p in terminals {
        match kept.iter().position(|q| q.dist(*p) <= tol) {
            Some(k) => map.push(k),
            None => {
                map.push(kept.len());
                kept.push(*p);
            }
        }
    }
    (kept, map)
}

/// Euclidean Steiner minimal tree by exhaustive full-topology enumeration.
///
/// Terminals are labelled `t1..tn` in input order and Steiner points
/// `s1..`. The returned tree is in full form; degenerate SMTs appear with
/// zero-length edges. Ties go to the earliest topology in enumeration order,
/// which inserts terminals sorted by coordinates.
pub fn euclidean_smt<T: Scalar>(terminals: &[Point<T>], opts: &SmtOptions<T>) -> Result<SmtResult<T>> {
    if terminals.len() < 2 {
        return Err(Error::Usage(format!("need at least 2 terminals, got {}", terminals.len())));
    }
    if let Some(i) = terminals.iter().position(|p| !p.is_finite()) {
        return Err(Error::Input(format!("terminal {} is not finite", i + 1)));
    }
    let (unique, map) = collapse_duplicates(terminals);
    let mut warnings = Vec::new();
    if unique.len() < terminals.len() {
        let msg = format!("collapsed {} coincident terminal(s)", terminals.len() - unique.len());
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let n = unique.len();
    if n > opts.max_n {
        return Err(Error::Capacity(format!("Euclidean SMT supports n <= {} terminals, got {n}", opts.max_n)));
    }
    if n < 2 {
        return Err(Error::Input("all terminals coincide".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| unique[a].lex_cmp(&unique[b]));
    let (lab, kinds) = labels(n);
    let lists = full_topology_edge_lists(n);
    let relabel = |v: usize| if v < n { order[v] } else { v };
    let solve = |edges: &Vec<(usize, usize)>| -> (Topology, Vec<Point<T>>, T) {
        let e: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (relabel(a), relabel(b))).collect();
        let top = Topology::new(lab.clone(), kinds.clone(), e).expect("enumerated topology is valid");
        let mut pos = unique.clone();
        pos.resize(top.node_count(), Point::origin());
        let len = relax_topology(&top, &mut pos, opts);
        (top, pos, len)
    };
    let results: Vec<(Topology, Vec<Point<T>>, T)> =
        if opts.parallel { lists.par_iter().map(solve).collect() } else { lists.iter().map(solve).collect() };
    let mut ranked: Vec<(usize, T)> = results.iter().enumerate().map(|(i, r)| (i, r.2)).collect();
    ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let (rank, length) = ranked[0];
    let runner_up_gap = ranked.get(1).map(|r| r.1 - length);
    let (top, pos, _) = results.into_iter().nth(rank).unwrap();
    let mut tree = EmbeddedTree::new(top, pos, Norm::Euclidean)?;
    if unique.len() < terminals.len() {
        tree = reattach_duplicates(&tree, terminals, &map)?;
    }
    let degenerate_edges = degenerate_edge_labels(&tree);
    Ok(SmtResult { tree, length, topology_rank: rank, degenerate_edges, runner_up_gap, warnings })
}

/// Puts collapsed duplicate terminals back, each joined to its twin by a
/// zero-length edge, and re-splits into full form.
fn reattach_duplicates<T: Scalar>(tree: &EmbeddedTree<T>, terminals: &[Point<T>], map: &[usize]) -> Result<EmbeddedTree<T>> {
    let t = tree.topology();
    let k = map.iter().copied().max().map_or(0, |m| m + 1);
    // kept terminal j sits at node j and carries the label of its first input.
    let first: Vec<usize> = (0..k).map(|j| map.iter().position(|&m| m == j).unwrap()).collect();
    let mut labels: Vec<String> = first.iter().map(|&i| format!("t{}", i + 1)).collect();
    let mut kinds = vec![NodeKind::Terminal; k];
    let mut positions: Vec<Point<T>> = first.iter().map(|&i| terminals[i]).collect();
    for s in t.steiners() {
        labels.push(t.label(s).to_string());
        kinds.push(NodeKind::Steiner);
        positions.push(tree.position(s));
    }
    let mut edges: Vec<(usize, usize)> = t.edges().to_vec();
    for (i, &j) in map.iter().enumerate() {
        if first[j] != i {
            labels.push(format!("t{}", i + 1));
            kinds.push(NodeKind::Terminal);
            positions.push(terminals[i]);
            edges.push((j, labels.len() - 1));
        }
    }
    EmbeddedTree::new(Topology::new(labels, kinds, edges)?, positions, Norm::Euclidean)?.to_full_form()
}

pub(crate) fn degenerate_edge_labels<T: Scalar>(tree: &EmbeddedTree<T>) -> Vec<(String, String)> {
    let t = tree.topology();
    t.edges()
        .iter()
        .enumerate()
        .filter(|&(e, _)| tree.edge_length(e) < T::lit(DEGENERATE_EPS))
        .map(|(_, &(a, b))| (t.label(a).to_string(), t.label(b).to_string()))
        .collect()
}

/// Shortest Euclidean embedding of a fixed full topology. `terminals` gives
/// positions in the order of the topology's terminal nodes.
pub fn euclidean_smt_for_topology<T: Scalar>(
    topology: &FullTopology,
    terminals: &[Point<T>],
    opts: &SmtOptions<T>,
) -> Result<EmbeddedTree<T>> {
    if terminals.len() != topology.terminal_count() {
        return Err(Error::Structural(format!(
            "topology has {} terminals, got {} positions",
            topology.terminal_count(),
            terminals.len()
        )));
    }
    let mut pos = vec![Point::origin(); topology.node_count()];
    for (i, t) in topology.terminals().zip(terminals) {
        pos[i] = *t;
    }
    relax_topology(topology, &mut pos, opts);
    EmbeddedTree::new((**topology).clone(), pos, Norm::Euclidean)
}

/// Smallest angle between two edges at any node after contracting
/// degenerate edges; `pi` when no node has two edges.
pub fn min_edge_angle<T: Scalar>(tree: &EmbeddedTree<T>) -> Result<T> {
    let c = tree.contract_degenerate(T::lit(DEGENERATE_EPS))?;
    let t = c.topology();
    let mut min = T::PI();
    for v in 0..t.node_count() {
        let nb = t.neighbors(v);
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let a = (c.position(nb[i]) - c.position(v)).angle_to(c.position(nb[j]) - c.position(v));
                min = min.min(a);
            }
        }
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::full_topologies;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn base_case() -> Vec<Point<f64>> {
        let h = 3f64.sqrt() / 2.0;
        vec![p(-1.0, h), p(-1.0, -h), p(1.0, h), p(1.0, -h)]
    }

    fn mst_length(pts: &[Point<f64>]) -> f64 {
        let n = pts.len();
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut total = 0.0;
        for _ in 0..n {
            let u = (0..n).filter(|&i| !in_tree[i]).min_by(|&a, &b| best[a].partial_cmp(&best[b]).unwrap()).unwrap();
            in_tree[u] = true;
            total += best[u];
            for v in 0..n {
                if !in_tree[v] {
                    best[v] = best[v].min(pts[u].dist(pts[v]));
                }
            }
        }
        total
    }

    #[test]
    fn base_case_length_and_points() {
        let r = euclidean_smt(&base_case(), &SmtOptions::default()).unwrap();
        assert!((r.length - 5.0).abs() < 1e-9, "{}", r.length);
        let mut s: Vec<Point<f64>> = r.tree.topology().steiners().map(|i| r.tree.position(i)).collect();
        s.sort_by(|a, b| a.lex_cmp(b));
        assert!(s[0].dist(p(-0.5, 0.0)) < 1e-8);
        assert!(s[1].dist(p(0.5, 0.0)) < 1e-8);
        assert!(r.runner_up_gap.unwrap() > 0.19);
        assert!(min_edge_angle(&r.tree).unwrap() >= 2.0 * PI / 3.0 - 1e-5);
    }

    #[test]
    fn base_case_forced_alternate_topology() {
        let t = crate::topology::Topology::from_labels(
            &["a", "b", "c", "d"],
            &["s1", "s2"],
            &[("a", "s1"), ("c", "s1"), ("s1", "s2"), ("b", "s2"), ("d", "s2")],
        )
        .unwrap();
        let full = FullTopology::new(t).unwrap();
        let tree = euclidean_smt_for_topology(&full, &base_case(), &SmtOptions::default()).unwrap();
        assert!((tree.total_length() - 3.0 * 3f64.sqrt()).abs() < 1e-9);
        let mut s: Vec<Point<f64>> = tree.topology().steiners().map(|i| tree.position(i)).collect();
        s.sort_by(|a, b| a.lex_cmp(b));
        assert!(s[0].dist(p(0.0, -3f64.sqrt() / 6.0)) < 1e-8);
        assert!(s[1].dist(p(0.0, 3f64.sqrt() / 6.0)) < 1e-8);
    }

    #[test]
    fn equilateral_and_wide_angle_triangles() {
        let s = 2.0;
        let tri = vec![p(0.0, 0.0), p(s, 0.0), p(s / 2.0, s * 3f64.sqrt() / 2.0)];
        let r = euclidean_smt(&tri, &SmtOptions::default()).unwrap();
        assert!((r.length - s * 3f64.sqrt()).abs() < 1e-9);
        let c = r.tree.position(3);
        assert!(c.dist(p(1.0, 3f64.sqrt() / 3.0)) < 1e-9);

        let wide = vec![Point::polar(0.0) * 5.1, p(0.0, 0.0), Point::polar(2.0 * PI / 3.0) * 5.1];
        let r = euclidean_smt(&wide, &SmtOptions::default()).unwrap();
        assert!((r.length - 10.2).abs() < 1e-9);
        assert_eq!(r.degenerate_edges.len(), 1);
        let contracted = r.contracted().unwrap();
        assert_eq!(contracted.topology().steiner_count(), 0);
    }

    #[test]
    fn capacity_and_duplicates() {
        let pts: Vec<Point<f64>> = (0..9).map(|i| p(i as f64, (i * i) as f64)).collect();
        assert!(matches!(euclidean_smt(&pts, &SmtOptions::default()), Err(Error::Capacity(_))));
        let dup = vec![p(0.0, 0.0), p(3.0, 0.0), p(0.0, 0.0), p(0.0, 4.0)];
        let r = euclidean_smt(&dup, &SmtOptions::default()).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.tree.terminal_count(), 4);
        assert!(r.tree.is_full());
        assert!((r.length - euclidean_smt(&[p(0.0, 0.0), p(3.0, 0.0), p(0.0, 4.0)], &SmtOptions::default()).unwrap().length).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cardinality() {
        let names = |n: usize| (1..=n).map(|i| format!("t{i}")).collect::<Vec<_>>();
        assert_eq!(full_topologies(&names(5)).len(), 15);
        assert_eq!(full_topologies(&names(6)).len(), 105);
    }

    #[test]
    fn three_terminals_match_fermat_point() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t: Vec<Point<f64>> = (0..3).map(|_| p(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
            let f = fermat_point(t[0], t[1], t[2]);
            let direct: f64 = t.iter().map(|q| q.dist(f)).sum();
            let r = euclidean_smt(&t, &SmtOptions::default()).unwrap();
            assert!((r.length - direct).abs() < 1e-9);
        }
    }

    fn instance() -> impl Strategy<Value = Vec<Point<f64>>> {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| p(x, y)), 3..=6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn smt_no_longer_than_mst(pts in instance()) {
            let r = euclidean_smt(&pts, &SmtOptions::default()).unwrap();
            prop_assert!(r.length <= mst_length(&pts) + 1e-9);
            prop_assert!(min_edge_angle(&r.tree).unwrap() >= 2.0 * PI / 3.0 - 1e-5);
        }

        #[test]
        fn smt_scales_and_moves_rigidly(pts in instance(), k in 0.1f64..10.0, theta in 0.0f64..6.3, dx in -5.0f64..5.0) {
            let base = euclidean_smt(&pts, &SmtOptions::default()).unwrap().length;
            let moved: Vec<Point<f64>> = pts.iter().map(|q| q.rotate(theta) * k + p(dx, -dx)).collect();
            let other = euclidean_smt(&moved, &SmtOptions::default()).unwrap().length;
            prop_assert!((other - k * base).abs() <= 1e-8 * (k * base).max(1.0));
        }
    }
}
