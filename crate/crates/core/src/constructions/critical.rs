//! Critical three-terminal SMTs in polygon norms that are not parallelograms.
//!
//! A star centred at a norm-Fermat point stays Steiner minimal when its
//! terminals slide along the rays from the centre, because the optimality
//! condition at the centre only sees the directions. So the search draws a
//! jittered triple, moves its terminals along those rays to distances
//! `a + eps_k`, keeps stars with a real degree-3 Steiner point and
//! non-tessellating balls, and checks with the exact oracle that the SMT
//! wastes exactly two beads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::{classify, Norm};
use crate::oracle::{mspt_exact3, DEFAULT_SEED};
use crate::scalar::Scalar;
use crate::smt::{parallelogram::tessellation_check, polygon_fermat_point, smt, star3, SmtOptions};
use crate::tree::EmbeddedTree;

/// Integer part of every SMT edge.
pub const CRITICAL_INTEGER_PART: i64 = 3;
pub const CRITICAL_MAX_TRIALS: usize = 10_000;
/// Rotational jitter magnitudes (radians) cycled through by the search.
pub const JITTER_MAGNITUDES: [f64; 4] = [0.05, 0.1, 0.2, 0.4];

#[derive(Clone, Debug)]
pub struct CriticalInstance<T> {
    pub terminals: [Point<T>; 3],
    /// The star at the origin, an SMT of the terminals.
    pub smt_tree: EmbeddedTree<T>,
    pub optimal_tree: EmbeddedTree<T>,
    pub smt_beads: i64,
    pub optimal_beads: i64,
    pub gap: i64,
    pub integer_part: i64,
    pub epsilons: [T; 3],
    /// Moving the Steiner point along this direction strictly shrinks the
    /// distances to `witness_pair`, so the balls do not tessellate.
    pub witness_direction: Point<T>,
    pub witness_pair: (usize, usize),
    pub jitter: T,
    pub trials: usize,
}

/// One-sided derivative of `|x - t|` at `x = 0` in direction `d`.
fn slope<T: Scalar>(norm: &Norm<T>, t: Point<T>, d: Point<T>) -> T {
    let h = T::lit(1e-7);
    (norm.distance(d * h, t) - norm.distance(Point::origin(), t)) / h
}

/// The direction and pair with the steepest common decrease, if any pair
/// can be shrunk together.
fn shrink_witness<T: Scalar>(norm: &Norm<T>, t: &[Point<T>; 3]) -> Option<(Point<T>, (usize, usize))> {
    let mut best: Option<(T, Point<T>, (usize, usize))> = None;
    for k in 0..720 {
        let d = Point::polar(T::lit(k as f64 * std::f64::consts::TAU / 720.0));
        let s = [0, 1, 2].map(|i| slope(norm, t[i], d));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let worst = s[i].max(s[j]);
            if worst < T::lit(-1e-6) && best.as_ref().is_none_or(|b| worst < b.0) {
                best = Some((worst, d, (i, j)));
            }
        }
    }
    best.map(|(_, d, p)| (d, p))
}

/// A critical instance for `norm` with fractional parts `epsilons`, using
/// the default seed and trial budget. Small fractional parts (around 0.2 or
/// less) succeed almost at once; near 0.5 two ceilings rarely drop together
/// and the search may run out of trials.
pub fn critical_smt3<T: Scalar>(norm: &Norm<T>, epsilons: [T; 3]) -> Result<CriticalInstance<T>> {
    critical_smt3_with(norm, epsilons, DEFAULT_SEED, CRITICAL_MAX_TRIALS)
}

pub fn critical_smt3_with<T: Scalar>(
    norm: &Norm<T>,
    epsilons: [T; 3],
    seed: u64,
    max_trials: usize,
) -> Result<CriticalInstance<T>> {
    let ball = norm.ball().ok_or_else(|| Error::Usage("critical SMTs need a polygon norm".into()))?;
    if classify(norm).is_parallelogram() {
        return Err(Error::Usage("critical SMTs do not exist for parallelogram norms".into()));
    }
    if epsilons.iter().any(|e| !(*e > T::zero() && *e < T::one())) {
        return Err(Error::Usage("epsilons must lie strictly between 0 and 1".into()));
    }
    let a = T::from_i64(CRITICAL_INTEGER_PART).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = [0usize; 4];
    for trial in 0..max_trials {
        let jitter = T::lit(JITTER_MAGNITUDES[trial % JITTER_MAGNITUDES.len()]);
        let base: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let raw: [Point<T>; 3] = [0, 1, 2].map(|k| {
            let angle = T::lit(base + std::f64::consts::TAU * k as f64 / 3.0) + jitter * T::lit(rng.gen_range(-1.0..1.0));
            Point::polar(angle) * T::lit(rng.gen_range(1.0..3.0))
        });
        // rays from a norm-Fermat point keep it minimal under rescaling
        let centre = polygon_fermat_point(ball, &raw);
        if raw.iter().any(|t| norm.distance(centre, *t) < T::lit(1e-6)) {
            rejected[0] += 1;
            continue;
        }
        let terminals: [Point<T>; 3] = [0, 1, 2].map(|k| {
            let u = raw[k] - centre;
            u * ((a + epsilons[k]) / norm.norm(u))
        });
        let origin = Point::origin();
        let at = |x: Point<T>| terminals.iter().map(|t| norm.distance(x, *t)).sum::<T>();
        if at(origin) > at(polygon_fermat_point(ball, &terminals)) + T::lit(1e-9) * a {
            rejected[0] += 1;
            continue;
        }
        if tessellation_check(norm, terminals, origin).is_tessellation {
            rejected[1] += 1;
            continue;
        }
        let Some((witness_direction, witness_pair)) = shrink_witness(norm, &terminals) else {
            rejected[1] += 1;
            continue;
        };
        let smt_tree = star3(norm, terminals, origin)?;
        let smt_beads = smt_tree.bead_count().bead_count;
        // the solver's SMT may pick another minimizer; it must agree on beads
        if smt(norm, &terminals, &SmtOptions::default())?.tree.bead_count().bead_count != smt_beads {
            rejected[2] += 1;
            continue;
        }
        let oracle = mspt_exact3(&terminals, norm)?;
        let gap = smt_beads - oracle.best_beads;
        if gap != 2 {
            rejected[3] += 1;
            continue;
        }
        log::info!("critical instance after {} trials (jitter {jitter})", trial + 1);
        return Ok(CriticalInstance {
            terminals,
            smt_tree,
            optimal_tree: oracle.best_tree,
            smt_beads,
            optimal_beads: oracle.best_beads,
            gap,
            integer_part: CRITICAL_INTEGER_PART,
            epsilons,
            witness_direction,
            witness_pair,
            jitter,
            trials: trial + 1,
        });
    }
    Err(Error::SearchFailed {
        trials: max_trials,
        reason: format!(
            "rejected {} not minimal, {} tessellating, {} solver disagreement, {} gap != 2",
            rejected[0], rejected[1], rejected[2], rejected[3]
        ),
    })
}
