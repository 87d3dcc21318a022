//! Full Euclidean Steiner trees with a prescribed topology, grown from a
//! three-terminal star by repeatedly sprouting a terminal into a cherry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::Norm;
use crate::scalar::Scalar;
use crate::smt::{euclidean_smt, SmtOptions};
use crate::topology::{root_cherry, FullTopology, NodeKind, Topology};
use crate::tree::EmbeddedTree;

/// Replaces degree-1 terminal `terminal` by a Steiner point and attaches two
/// new terminals at distance `length`, all three edges meeting at 120
/// degrees. The Steiner point takes the first free label `s<k>`; the new
/// terminals are `<terminal>a` (turned left) and `<terminal>b`.
pub fn sprout<T: Scalar>(tree: &EmbeddedTree<T>, terminal: &str, length: T) -> Result<EmbeddedTree<T>> {
    let t = tree.topology();
    let mut k = t.steiner_count() + 1;
    while t.index_of(&format!("s{k}")).is_some() {
        k += 1;
    }
    sprout_labeled(tree, terminal, length, &format!("s{k}"), [&format!("{terminal}a"), &format!("{terminal}b")])
}

/// [`sprout`] with explicit labels: the sprouted node is renamed `steiner`,
/// `new_terminals[0]` turns left of the incoming edge and `[1]` right.
pub fn sprout_labeled<T: Scalar>(
    tree: &EmbeddedTree<T>,
    terminal: &str,
    length: T,
    steiner: &str,
    new_terminals: [&str; 2],
) -> Result<EmbeddedTree<T>> {
    if !tree.norm().is_euclidean() {
        return Err(Error::Usage("sprouting needs the Euclidean norm".into()));
    }
    if !(length > T::zero()) {
        return Err(Error::Usage(format!("sprout length must be positive, got {length:?}")));
    }
    let t = tree.topology();
    let i = t.index_of(terminal).ok_or_else(|| Error::Structural(format!("no node labelled {terminal:?}")))?;
    if !t.is_terminal(i) || t.degree(i) != 1 {
        return Err(Error::Structural(format!("{terminal:?} is not a degree-1 terminal")));
    }
    let w = t.neighbors(i)[0];
    let dir = (tree.position(i) - tree.position(w)).normalized();
    let sixty = T::FRAC_PI_3();
    let s = tree.position(i);
    let mut labels = t.labels().to_vec();
    let mut kinds = t.kinds().to_vec();
    let mut positions = tree.positions().to_vec();
    let mut edges = t.edges().to_vec();
    labels[i] = steiner.to_string();
    kinds[i] = NodeKind::Steiner;
    for (label, turn) in new_terminals.iter().zip([sixty, -sixty]) {
        labels.push(label.to_string());
        kinds.push(NodeKind::Terminal);
        positions.push(s + dir.rotate(turn) * length);
        edges.push((i, labels.len() - 1));
    }
    EmbeddedTree::new(Topology::new(labels, kinds, edges)?, positions, Norm::Euclidean)
}

/// One inverse step of the cherry reduction: `steiner` was a terminal and
/// sprouts `terminals` at distance `length`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SproutStep<T> {
    pub steiner: String,
    pub terminals: (String, String),
    pub length: T,
}

/// How a full topology is grown: a star on `base` around `base_steiner`,
/// then `steps` in order.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SproutPlan<T> {
    pub base_steiner: String,
    pub base: [String; 3],
    pub base_length: T,
    pub steps: Vec<SproutStep<T>>,
    /// Length margin over other topologies after growing to `i` terminals,
    /// for `i = 4, 5, ...`.
    pub f_constants: Vec<T>,
}

/// `(3 sqrt 3 - 5) * scale / 4^(i - 4)`: the margin the base case and each
/// sprouting keep over every Steiner tree with another topology.
pub fn topology_margin<T: Scalar>(i: usize, scale: T) -> T {
    let base = T::lit(3.0) * T::lit(3.0).sqrt() - T::lit(5.0);
    base * scale / T::lit(4.0).powi(i as i32 - 4)
}

/// Reduces `target` cherry by cherry (smallest terminal pair first) down to
/// three terminals and returns the inverse as a sprouting plan.
pub fn sprout_plan<T: Scalar>(target: &FullTopology, scale: T) -> Result<SproutPlan<T>> {
    let n = target.terminal_count();
    if n < 3 {
        return Err(Error::Usage(format!("sprouting needs n >= 3 terminals, got {n}")));
    }
    if !(scale > T::zero()) {
        return Err(Error::Usage(format!("scale must be positive, got {scale:?}")));
    }
    let mut current: Topology = (**target).clone();
    let mut reversed = Vec::new();
    while current.terminal_count() > 3 {
        let full = FullTopology::new(current.clone())?;
        let cherry = root_cherry(&full).expect("full topologies have cherries");
        let (a, b) = cherry.terminals;
        let s = cherry.bead;
        reversed.push((current.label(s).to_string(), current.label(a).to_string(), current.label(b).to_string()));
        let keep: Vec<usize> = (0..current.node_count()).filter(|&v| v != a && v != b).collect();
        let index = |v: usize| keep.iter().position(|&k| k == v).unwrap();
        let labels = keep.iter().map(|&v| current.label(v).to_string()).collect();
        let kinds = keep.iter().map(|&v| if v == s { NodeKind::Terminal } else { current.kind(v) }).collect();
        let edges = current
            .edges()
            .iter()
            .filter(|&&(x, y)| x != a && x != b && y != a && y != b)
            .map(|&(x, y)| (index(x), index(y)))
            .collect();
        current = Topology::new(labels, kinds, edges)?;
    }
    let centre = current.steiners().next().expect("three-terminal full topology has a Steiner node");
    let mut base: Vec<String> = current.terminals().map(|v| current.label(v).to_string()).collect();
    base.sort();
    let steps = reversed
        .into_iter()
        .rev()
        .enumerate()
        .map(|(k, (steiner, a, b))| {
            let i = k + 4;
            let length = if i == 4 { scale } else { topology_margin(i, scale) };
            SproutStep { steiner, terminals: (a, b), length }
        })
        .collect();
    Ok(SproutPlan {
        base_steiner: current.label(centre).to_string(),
        base: [base[0].clone(), base[1].clone(), base[2].clone()],
        base_length: scale,
        steps,
        f_constants: (4..=n).map(|i| topology_margin(i, scale)).collect(),
    })
}

/// Grows the tree described by `plan` and returns it with the target's node order.
pub fn grow<T: Scalar>(target: &FullTopology, plan: &SproutPlan<T>) -> Result<EmbeddedTree<T>> {
    let angle = T::lit(2.0) * T::FRAC_PI_3();
    let spokes: Vec<(&str, Point<T>)> = plan
        .base
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), Point::polar(T::FRAC_PI_2() + angle * T::from_usize_lossy(k)) * plan.base_length))
        .collect();
    let mut tree = EmbeddedTree::from_parts(
        &spokes,
        &[(plan.base_steiner.as_str(), Point::origin())],
        &[
            (plan.base[0].as_str(), plan.base_steiner.as_str()),
            (plan.base[1].as_str(), plan.base_steiner.as_str()),
            (plan.base[2].as_str(), plan.base_steiner.as_str()),
        ],
        Norm::Euclidean,
    )?;
    for step in &plan.steps {
        tree = sprout_labeled(&tree, &step.steiner, step.length, &step.steiner, [&step.terminals.0, &step.terminals.1])?;
    }
    reorder_like(&tree, target)
}

/// The same embedded tree with nodes in `target`'s order.
pub(crate) fn reorder_like<T: Scalar>(tree: &EmbeddedTree<T>, target: &Topology) -> Result<EmbeddedTree<T>> {
    let positions = target
        .labels()
        .iter()
        .map(|l| tree.position_of(l).ok_or_else(|| Error::Structural(format!("grown tree lacks node {l:?}"))))
        .collect::<Result<Vec<_>>>()?;
    EmbeddedTree::new(target.clone(), positions, tree.norm().clone())
}

/// Checks that `tree` is the unique Steiner minimal tree of its terminals:
/// the exhaustive solver must return the same length and terminal splits,
/// with every other topology strictly longer. Returns the runner-up gap.
pub fn verify_unique_smt<T: Scalar>(tree: &EmbeddedTree<T>) -> Result<T> {
    let top = tree.topology();
    let terminals = tree.terminal_positions();
    let result = euclidean_smt(&terminals, &SmtOptions::default())?;
    let names: Vec<String> = top.terminals().map(|v| top.label(v).to_string()).collect();
    let solved = result.contracted()?;
    let mut labels = solved.topology().labels().to_vec();
    for l in labels.iter_mut() {
        if let Some(i) = l.strip_prefix('t').and_then(|d| d.parse::<usize>().ok()) {
            *l = names[i - 1].clone();
        } else {
            l.insert_str(0, "solver:");
        }
    }
    let solved_top = solved.topology().relabeled(labels)?;
    let length = tree.total_length();
    let tol = T::lit(1e-9) * T::one().max(length);
    let gap = result.runner_up_gap.unwrap_or(T::infinity());
    if (result.length - length).abs() > tol || solved_top.splits() != top.splits() || !(gap > T::zero()) {
        return Err(Error::Construction(format!(
            "tree of length {length:?} is not the unique SMT: solver length {:?}, runner-up gap {gap:?}, topology match {}",
            result.length,
            solved_top.splits() == top.splits()
        )));
    }
    Ok(gap)
}

/// A Euclidean SMT whose topology is `target`, built by sprouting from a
/// star with arms of length `scale` and checked against the exhaustive
/// solver when `n` is within its capacity.
pub fn build_smt_with_topology<T: Scalar>(target: &FullTopology, scale: T) -> Result<EmbeddedTree<T>> {
    let plan = sprout_plan(target, scale)?;
    let tree = grow(target, &plan)?;
    if tree.terminal_count() <= SmtOptions::<T>::default().max_n {
        verify_unique_smt(&tree)?;
    } else {
        log::warn!("{} terminals exceed the solver cap; SMT not re-verified", tree.terminal_count());
    }
    Ok(tree)
}
