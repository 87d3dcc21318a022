//! Multi-start local search over bead positions for a fixed topology.
//!
//! Moves: re-place one Steiner node at its exact best position given its
//! neighbours, and (Euclidean) re-place an adjacent Steiner pair exactly given
//! their four outside neighbours. A move is taken when it lowers the ceiling
//! sum, or keeps it and shortens the tree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::norms::Norm;
use crate::oracle::exact::{best_meeting_point, best_pair_placement, TieBreak};
use crate::scalar::{ceil_eps, Scalar};
use crate::smt::{relax_topology, SmtOptions};
use crate::topology::Topology;

/// Ceiling sum over edges; beads are this plus `1 - n`.
pub fn ceiling_sum<T: Scalar>(top: &Topology, norm: &Norm<T>, pos: &[Point<T>]) -> i64 {
    top.edges().iter().map(|&(a, b)| ceil_eps(norm.distance(pos[a], pos[b]))).sum()
}

pub fn total_length<T: Scalar>(top: &Topology, norm: &Norm<T>, pos: &[Point<T>]) -> T {
    top.edges().iter().map(|&(a, b)| norm.distance(pos[a], pos[b])).sum()
}

/// Counts evaluated placements against a cap.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub limit: u64,
    pub used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }
    pub fn exhausted(&self) -> bool {
        self.used >= self.limit
    }
    pub fn remaining(&self) -> u64 {
        self.limit.saturating_sub(self.used)
    }
    pub fn spend(&mut self, n: u64) {
        self.used = self.used.saturating_add(n);
    }
}

fn node_cost<T: Scalar>(top: &Topology, norm: &Norm<T>, pos: &[Point<T>], s: usize) -> (i64, T) {
    let mut c = 0;
    let mut l = T::zero();
    for &v in top.neighbors(s) {
        let d = norm.distance(pos[s], pos[v]);
        c += ceil_eps(d);
        l = l + d;
    }
    (c, l)
}

/// Repeats single-node and pair moves until none applies. Returns whether the
/// budget ran out first.
pub fn polish<T: Scalar>(top: &Topology, norm: &Norm<T>, pos: &mut [Point<T>], budget: &mut Budget) -> bool {
    let steiners: Vec<usize> = top.steiners().collect();
    let scale = T::one().max(total_length(top, norm, pos));
    let shorter = T::lit(1e-12) * scale;
    for _round in 0..10_000 {
        if budget.exhausted() {
            return true;
        }
        let mut moved = false;
        for &s in &steiners {
            let anchors: Vec<Point<T>> = top.neighbors(s).iter().map(|&v| pos[v]).collect();
            let (m, spent) = best_meeting_point(norm, &anchors, TieBreak::Shortest);
            budget.spend(spent);
            let (c, l) = node_cost(top, norm, pos, s);
            if m.cost < c || (m.cost == c && m.length < l - shorter) {
                pos[s] = m.point;
                moved = true;
            }
        }
        if moved {
            continue;
        }
        if norm.is_euclidean() {
            for &(u, v) in top.edges() {
                if top.is_terminal(u) || top.is_terminal(v) || top.degree(u) != 3 || top.degree(v) != 3 {
                    continue;
                }
                let left: Vec<usize> = top.neighbors(u).iter().copied().filter(|&w| w != v).collect();
                let right: Vec<usize> = top.neighbors(v).iter().copied().filter(|&w| w != u).collect();
                let current = node_cost(top, norm, pos, u).0 + node_cost(top, norm, pos, v).0
                    - ceil_eps(norm.distance(pos[u], pos[v]));
                let search =
                    best_pair_placement([pos[left[0]], pos[left[1]], pos[right[0]], pos[right[1]]], current, budget.remaining());
                budget.spend(search.evaluated);
                if let Some(best) = search.best {
                    pos[u] = best.a;
                    pos[v] = best.b;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            return false;
        }
    }
    false
}

/// Outcome of a fixed-topology search.
#[derive(Clone, Debug)]
pub struct FixedSearch<T> {
    pub positions: Vec<Point<T>>,
    pub ceiling_sum: i64,
    pub length: T,
    pub starts: usize,
    pub budget_exhausted: bool,
}

/// Start positions for the Steiner nodes: the relaxed shortest embedding,
/// that embedding snapped to the nearest terminal, and `random` jittered
/// copies of it.
pub fn starting_points<T: Scalar>(
    top: &Topology,
    norm: &Norm<T>,
    terminals_pos: &[Point<T>],
    random: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Point<T>>> {
    let mut relaxed = terminals_pos.to_vec();
    if norm.is_euclidean() && top.steiners().all(|s| top.degree(s) == 3) {
        relax_topology(top, &mut relaxed, &SmtOptions::default());
    } else {
        // harmonic-style averaging is enough to seed polygon norms
        for s in top.steiners() {
            relaxed[s] = top.terminals().fold(Point::origin(), |a, t| a + terminals_pos[t])
                * (T::one() / T::from_usize_lossy(top.terminal_count()));
        }
        for _ in 0..200 {
            for s in top.steiners() {
                let nb = top.neighbors(s);
                relaxed[s] = nb.iter().fold(Point::origin(), |a, &v| a + relaxed[v]) * (T::one() / T::from_usize_lossy(nb.len()));
            }
        }
    }
    let mut starts = vec![relaxed.clone()];
    let mut nearest = relaxed.clone();
    for s in top.steiners() {
        let t = top
            .terminals()
            .min_by(|&a, &b| norm.distance(relaxed[s], relaxed[a]).partial_cmp(&norm.distance(relaxed[s], relaxed[b])).unwrap())
            .unwrap();
        nearest[s] = relaxed[t];
    }
    starts.push(nearest);
    for _ in 0..random {
        let mut jittered = relaxed.clone();
        for s in top.steiners() {
            let angle = T::lit(rng.gen_range(0.0..std::f64::consts::TAU));
            let radius = T::lit(rng.gen::<f64>().sqrt() * 1.5);
            jittered[s] = relaxed[s] + Point::polar(angle) * radius;
        }
        starts.push(jittered);
    }
    starts
}

/// Multi-start local search on one topology. `positions` must hold the
/// terminal coordinates (Steiner entries are ignored).
pub fn search_fixed_topology<T: Scalar>(
    top: &Topology,
    norm: &Norm<T>,
    positions: &[Point<T>],
    random_starts: usize,
    seed: u64,
    budget: &mut Budget,
) -> FixedSearch<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = starting_points(top, norm, positions, random_starts, &mut rng);
    let mut best: Option<(i64, T, Vec<Point<T>>)> = None;
    let mut exhausted = false;
    let mut used = 0;
    for mut start in starts {
        if budget.exhausted() && best.is_some() {
            exhausted = true;
            break;
        }
        used += 1;
        exhausted |= polish(top, norm, &mut start, budget);
        let c = ceiling_sum(top, norm, &start);
        let l = total_length(top, norm, &start);
        let better = match &best {
            None => true,
            Some((bc, bl, _)) => c < *bc || (c == *bc && l < *bl),
        };
        if better {
            best = Some((c, l, start));
        }
    }
    let (ceiling_sum, length, positions) = best.unwrap_or_else(|| {
        let p = positions.to_vec();
        (ceiling_sum(top, norm, &p), total_length(top, norm, &p), p)
    });
    FixedSearch { positions, ceiling_sum, length, starts: used, budget_exhausted: exhausted }
}
