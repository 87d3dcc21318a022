//! Instances where the SMT heuristic is off by exactly `2n - 4` beads.
//!
//! The SMT is laid out with 120-degree angles from a cherry terminal `t`:
//! the edge at `t` has length `a - eps` and every other edge `b + eps_k`,
//! with `eps_k` shrinking geometrically with depth. Displacing the Steiner
//! points outward in breadth-first order then pushes every edge but the first
//! just below its integer part, while the first edge stays below `a`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::Norm;
use crate::scalar::{ceil_eps, Scalar};
use crate::smt::{euclidean_smt, SmtOptions};
use crate::topology::{rooted_at_cherry, FullTopology};

use super::sprout::{grow, sprout_plan, topology_margin};
use crate::tree::EmbeddedTree;

/// Largest terminal count before the epsilon chain nears the ceiling tolerance.
pub const MAX_TIGHT_TERMINALS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonSign {
    Plus,
    Minus,
}

/// Preselected SMT edge length `integer_part +/- epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeLengthSpec<T> {
    pub edge: (String, String),
    pub integer_part: i64,
    pub sign: EpsilonSign,
    pub epsilon: T,
}

impl<T: Scalar> EdgeLengthSpec<T> {
    pub fn length(&self) -> T {
        let a = T::from_i64(self.integer_part).unwrap();
        match self.sign {
            EpsilonSign::Plus => a + self.epsilon,
            EpsilonSign::Minus => a - self.epsilon,
        }
    }
}

/// One Steiner displacement: `node` moved along `direction` by `distance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct DisplacementStep<T> {
    pub node: String,
    pub from: Point<T>,
    pub to: Point<T>,
    pub direction: Point<T>,
    pub distance: T,
}

#[derive(Clone, Debug)]
pub struct TightInstance<T> {
    /// In the order of the topology's terminal nodes.
    pub terminals: Vec<Point<T>>,
    pub smt_tree: EmbeddedTree<T>,
    pub displaced_tree: EmbeddedTree<T>,
    pub expected_gap: i64,
    pub edge_specs: Vec<EdgeLengthSpec<T>>,
    pub steps: Vec<DisplacementStep<T>>,
    /// False only above the exhaustive solver's cap, where the layout is not re-checked.
    pub smt_verified: bool,
}

/// How the SMT's turns and integer parts are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TightShape<T> {
    /// Every edge has the same integer part; the child with more terminals
    /// below it turns away from its parent's turn (with it when `flip`).
    Zigzag { integer_part: i64, flip: bool },
    /// Turns copied from the sprouted SMT of the topology at `scale`, integer
    /// parts from its rounded edge lengths (at least 2).
    Sprouted { scale: T },
}

#[derive(Clone, Copy, Debug)]
pub struct TightOptions<T> {
    pub shape: TightShape<T>,
    /// Fractional offset of the first edge.
    pub epsilon: T,
    /// `eps_k = epsilon / ratio^k` at depth `k`.
    pub ratio: T,
}

impl<T: Scalar> Default for TightOptions<T> {
    fn default() -> Self {
        TightOptions { shape: TightShape::Zigzag { integer_part: 3, flip: false }, epsilon: T::lit(0.5), ratio: T::lit(8.0) }
    }
}

/// Root of `g(x) = 0` on `[0, inf)` for increasing `g` with `g(0) < 0`,
/// bisected to `1e-12`.
fn bisect_outward<T: Scalar>(g: impl Fn(T) -> T) -> Result<T> {
    let mut hi = T::lit(1e-3);
    let mut tries = 0;
    while g(hi) < T::zero() {
        hi = hi * T::lit(2.0);
        tries += 1;
        if tries > 80 {
            return Err(Error::Construction("displacement has no root along its ray".into()));
        }
    }
    let mut lo = T::zero();
    while hi - lo > T::lit(1e-12) {
        let mid = (lo + hi) / T::lit(2.0);
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

struct Layout<T> {
    positions: Vec<Point<T>>,
    specs: Vec<EdgeLengthSpec<T>>,
    /// Steiner nodes in breadth-first order from the root terminal, with parents.
    order: Vec<(usize, usize)>,
    /// Integer part of the edge from each node to its parent.
    integer_to_parent: Vec<i64>,
    root_terminal: usize,
}

fn lay_out<T: Scalar>(top: &FullTopology, opts: &TightOptions<T>) -> Result<Layout<T>> {
    let rooted = rooted_at_cherry(top).expect("full topology with n >= 3 has a cherry");
    let root_terminal = rooted.root.terminals.0;
    let n_nodes = top.node_count();
    let mut parent = vec![usize::MAX; n_nodes];
    let mut bfs = vec![root_terminal];
    parent[root_terminal] = root_terminal;
    let mut i = 0;
    while i < bfs.len() {
        let u = bfs[i];
        for &v in top.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                bfs.push(v);
            }
        }
        i += 1;
    }
    // terminals below each node, seen from the root terminal
    let mut weight = vec![0usize; n_nodes];
    for &u in bfs.iter().rev() {
        if top.is_terminal(u) && u != root_terminal {
            weight[u] += 1;
        }
        if u != root_terminal {
            let p = parent[u];
            weight[p] += weight[u];
        }
    }
    let grown = match opts.shape {
        TightShape::Sprouted { scale } => Some(grow(top, &sprout_plan(top, scale)?)?),
        TightShape::Zigzag { .. } => None,
    };
    let rounded = |a: usize, b: usize| -> i64 {
        let g = grown.as_ref().unwrap();
        g.position(a).dist(g.position(b)).round().to_i64().unwrap().max(2)
    };
    let s0 = rooted.root.bead;
    let first = match opts.shape {
        TightShape::Zigzag { integer_part, .. } => integer_part,
        TightShape::Sprouted { .. } => rounded(root_terminal, s0),
    };
    let mut positions = vec![Point::origin(); n_nodes];
    let mut turn = vec![T::one(); n_nodes];
    let mut depth = vec![0i32; n_nodes];
    let mut integer_to_parent = vec![0i64; n_nodes];
    integer_to_parent[s0] = first;
    positions[s0] = Point::new(T::from_i64(first).unwrap() - opts.epsilon, T::zero());
    let mut specs = vec![EdgeLengthSpec {
        edge: (top.label(root_terminal).to_string(), top.label(s0).to_string()),
        integer_part: first,
        sign: EpsilonSign::Minus,
        epsilon: opts.epsilon,
    }];
    let mut order = vec![(s0, root_terminal)];
    let mut queue = VecDeque::from([s0]);
    while let Some(s) = queue.pop_front() {
        let p = parent[s];
        let dir = (positions[s] - positions[p]).normalized();
        let mut kids: Vec<usize> = top.neighbors(s).iter().copied().filter(|&v| v != p).collect();
        kids.sort_by(|&x, &y| weight[y].cmp(&weight[x]).then(top.label(x).cmp(top.label(y))));
        let eps = opts.epsilon / opts.ratio.powi(depth[s] + 1);
        for (k, &c) in kids.iter().enumerate() {
            let (sign, int) = match (opts.shape, grown.as_ref()) {
                (TightShape::Zigzag { integer_part, flip }, _) => {
                    let heavy = if flip { turn[s] } else { -turn[s] };
                    (if k == 0 { heavy } else { -heavy }, integer_part)
                }
                (TightShape::Sprouted { .. }, Some(g)) => {
                    let incoming = g.position(s) - g.position(p);
                    let sign = if incoming.cross(g.position(c) - g.position(s)) > T::zero() { T::one() } else { -T::one() };
                    (sign, rounded(s, c))
                }
                (TightShape::Sprouted { .. }, None) => unreachable!(),
            };
            turn[c] = sign;
            depth[c] = depth[s] + 1;
            integer_to_parent[c] = int;
            positions[c] = positions[s] + dir.rotate(sign * T::FRAC_PI_3()) * (T::from_i64(int).unwrap() + eps);
            specs.push(EdgeLengthSpec {
                edge: (top.label(s).to_string(), top.label(c).to_string()),
                integer_part: int,
                sign: EpsilonSign::Plus,
                epsilon: eps,
            });
            if !top.is_terminal(c) {
                order.push((c, s));
                queue.push_back(c);
            }
        }
    }
    Ok(Layout { positions, specs, order, integer_to_parent, root_terminal })
}

/// Builds a tight instance with explicit options; see [`tight_instance`].
pub fn tight_instance_with<T: Scalar>(target: &FullTopology, opts: &TightOptions<T>) -> Result<TightInstance<T>> {
    let n = target.terminal_count();
    if n < 3 {
        return Err(Error::Usage(format!("tight instances need n >= 3 terminals, got {n}")));
    }
    if n > MAX_TIGHT_TERMINALS {
        return Err(Error::Capacity(format!(
            "tight instances support n <= {MAX_TIGHT_TERMINALS} terminals (epsilon chain underflows), got {n}"
        )));
    }
    let layout = lay_out(target, opts)?;
    let smt_tree = EmbeddedTree::new((**target).clone(), layout.positions.clone(), Norm::Euclidean)?;
    let terminals = smt_tree.terminal_positions();
    let smt_verified = if n <= SmtOptions::<T>::default().max_n {
        let solved = euclidean_smt(&terminals, &SmtOptions::default())?;
        let length = smt_tree.total_length();
        if (solved.length - length).abs() > T::lit(1e-9) * T::one().max(length) {
            return Err(Error::Construction(format!(
                "laid-out tree (length {length:?}) is not an SMT: solver found {:?}",
                solved.length
            )));
        }
        true
    } else {
        false
    };

    let old = layout.positions;
    let mut pos = old.clone();
    let mut steps = Vec::new();
    for &(s, p) in &layout.order {
        let int = T::from_i64(layout.integer_to_parent[s]).unwrap();
        let (direction, target_len) = if p == layout.root_terminal {
            ((old[s] - old[p]).normalized(), int - opts.epsilon / T::lit(2.0))
        } else {
            let deficit = int - pos[s].dist(pos[p]);
            if !(deficit > T::zero() && deficit < T::one()) {
                return Err(Error::Construction(format!(
                    "edge {}-{} left at {:?} before displacing {}",
                    target.label(p),
                    target.label(s),
                    pos[s].dist(pos[p]),
                    target.label(s)
                )));
            }
            // recover three quarters of the parent's shortfall
            ((old[s] - old[p]).normalized(), int - deficit / T::lit(4.0))
        };
        let (start, anchor) = (pos[s], pos[p]);
        let distance = bisect_outward(|d| (start + direction * d).dist(anchor) - target_len)?;
        pos[s] = start + direction * distance;
        steps.push(DisplacementStep { node: target.label(s).to_string(), from: start, to: pos[s], direction, distance });
    }
    let displaced_tree = smt_tree.with_positions(pos)?;

    // Per-edge check: the first edge keeps its ceiling, every other drops by one.
    for spec in &layout.specs {
        let (a, b) = (target.index_of(&spec.edge.0).unwrap(), target.index_of(&spec.edge.1).unwrap());
        let before = old[a].dist(old[b]);
        let after = displaced_tree.position(a).dist(displaced_tree.position(b));
        let drop = ceil_eps(before) - ceil_eps(after);
        let expected = if spec.sign == EpsilonSign::Minus { 0 } else { 1 };
        let int = T::from_i64(spec.integer_part).unwrap();
        let frac_ok = after > int - T::one() && after < int;
        if drop != expected || !frac_ok {
            return Err(Error::Construction(format!(
                "edge {}-{}: {before:?} -> {after:?} (ceiling drop {drop}, expected {expected})",
                spec.edge.0, spec.edge.1
            )));
        }
    }
    let expected_gap = 2 * n as i64 - 4;
    let gap = smt_tree.bead_count().bead_count - displaced_tree.bead_count().bead_count;
    if gap != expected_gap {
        return Err(Error::Construction(format!("bead gap {gap}, expected {expected_gap}")));
    }
    Ok(TightInstance { terminals, smt_tree, displaced_tree, expected_gap, edge_specs: layout.specs, steps, smt_verified })
}

/// An instance on `target` whose SMT has exactly `2n - 4` more beads than a
/// displaced tree with the same topology. Tries both zigzag layouts with
/// integer part 3, then sprout-shaped layouts at growing scales, until the
/// laid-out tree is confirmed as the SMT. From six terminals on the zigzags
/// are tried last since they are rarely Steiner minimal there.
pub fn tight_instance<T: Scalar>(target: &FullTopology) -> Result<TightInstance<T>> {
    let n = target.terminal_count();
    let zigzags = [
        TightShape::Zigzag { integer_part: 3, flip: false },
        TightShape::Zigzag { integer_part: 3, flip: true },
    ];
    // smallest sprouted edge at least 2
    let base = T::lit(2.0) / topology_margin(n.max(4), T::one());
    let sprouted = [1.0, 4.0, 16.0, 64.0].map(|m| TightShape::Sprouted { scale: base * T::lit(m) });
    let shapes: Vec<TightShape<T>> =
        if n >= 6 { sprouted.into_iter().chain(zigzags).collect() } else { zigzags.into_iter().chain(sprouted).collect() };
    let mut last = None;
    for shape in shapes {
        let opts = TightOptions { shape, ..TightOptions::default() };
        match tight_instance_with(target, &opts) {
            Ok(t) => return Ok(t),
            Err(e @ Error::Capacity(_)) | Err(e @ Error::Usage(_)) => return Err(e),
            Err(e) => {
                log::debug!("tight layout {shape:?} rejected: {e}");
                last = Some(e);
            }
        }
    }
    Err(last.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{mspt_search, DEFAULT_BUDGET, DEFAULT_SEED};
    use crate::topology::full_topologies;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn three_terminals_gap_two_and_optimal() {
        let top = full_topologies(&names(3)).remove(0);
        let inst: TightInstance<f64> = tight_instance(&top).unwrap();
        assert_eq!(inst.expected_gap, 2);
        assert!(inst.smt_verified);
        let oracle = mspt_search(&inst.terminals, &Norm::Euclidean, DEFAULT_BUDGET, DEFAULT_SEED).unwrap();
        assert_eq!(oracle.best_beads, inst.displaced_tree.bead_count().bead_count);
        assert_eq!(inst.steps.len(), 1);
        assert!((inst.steps[0].distance - 0.25).abs() < 1e-11);
    }

    #[test]
    fn four_terminals_gap_four_and_optimal() {
        for top in full_topologies(&names(4)) {
            let inst: TightInstance<f64> = tight_instance(&top).unwrap();
            let oracle = mspt_search(&inst.terminals, &Norm::Euclidean, DEFAULT_BUDGET, DEFAULT_SEED).unwrap();
            assert!(oracle.status.is_verified());
            assert_eq!(oracle.best_beads, inst.displaced_tree.bead_count().bead_count);
        }
    }

    #[test]
    fn gap_for_larger_topologies() {
        for n in [5, 6] {
            for top in full_topologies(&names(n)) {
                let inst: TightInstance<f64> = tight_instance(&top).unwrap();
                assert_eq!(
                    inst.smt_tree.bead_count().bead_count - inst.displaced_tree.bead_count().bead_count,
                    2 * n as i64 - 4
                );
                assert_eq!(inst.displaced_tree.topology().edges(), inst.smt_tree.topology().edges());
            }
        }
    }

    #[test]
    fn capacity_limit() {
        // caterpillar: t1, t2 on s1, t_k on s_(k-1), t10 and t11 on s9
        let n = 11;
        let st = |i: usize| n + i - 1;
        let mut edges = vec![(0, st(1)), (1, st(1)), (n - 2, st(n - 2)), (n - 1, st(n - 2))];
        edges.extend((1..n - 2).map(|i| (st(i), st(i + 1))));
        edges.extend((3..=n - 2).map(|k| (k - 1, st(k - 1))));
        let mut labels = names(n);
        labels.extend((1..=n - 2).map(|i| format!("s{i}")));
        let mut kinds = vec![crate::topology::NodeKind::Terminal; n];
        kinds.extend(vec![crate::topology::NodeKind::Steiner; n - 2]);
        let top = FullTopology::new(crate::topology::Topology::new(labels, kinds, edges).unwrap()).unwrap();
        assert!(matches!(tight_instance::<f64>(&top), Err(Error::Capacity(_))));
    }
}
