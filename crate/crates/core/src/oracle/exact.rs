//! Exact bead minimization for one free point (any norm) and for a Steiner
//! pair with fixed neighbours (Euclidean).
//!
//! A point `x` has `ceil(|p_i x|) <= k_i` for all anchors exactly when it lies
//! in every ball `B(p_i, k_i)`. A nonempty intersection of balls always
//! contains one of: an anchor (radius 0), a boundary contact of two balls,
//! or (polygon norms) a ball corner, or (disks) a whole disk and hence its
//! center. Enumerating those points over integer radii is therefore exact.

use crate::geometry::Point;
use crate::norms::Norm;
use crate::oracle::disks::{circle_contacts, lens_distance, Disk, Lens};
use crate::scalar::{ceil_eps, Scalar};
use crate::smt::fermat::fermat_point;

/// Result of placing one point against fixed anchors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Meeting<T> {
    pub point: Point<T>,
    /// `sum ceil_eps(|anchor, point|)`.
    pub cost: i64,
    pub length: T,
    /// Norm distance from the point to its nearest anchor.
    pub clearance: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    /// Smallest total length among minimum-cost points.
    Shortest,
    /// Prefer points off the anchors, then shortest.
    PreferFull,
}

fn max_pairwise<T: Scalar>(norm: &Norm<T>, pts: &[Point<T>]) -> T {
    let mut d = T::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(norm.distance(pts[i], pts[j]));
        }
    }
    d
}

/// Largest integer radius worth trying around each anchor. Euclidean optima
/// can be projected into the anchors' hull; polygon norms get a generous cap.
pub fn radius_cap<T: Scalar>(norm: &Norm<T>, anchors: &[Point<T>]) -> i64 {
    let diam = ceil_eps(max_pairwise(norm, anchors));
    if norm.is_euclidean() {
        diam + 1
    } else {
        2 * diam + 2
    }
}

/// All candidate points for one free node against `anchors`.
pub fn meeting_candidates<T: Scalar>(norm: &Norm<T>, anchors: &[Point<T>]) -> Vec<Point<T>> {
    let cap = radius_cap(norm, anchors);
    let eps = T::lit(1e-9);
    let mut out: Vec<Point<T>> = anchors.to_vec();
    if norm.is_euclidean() && anchors.len() == 3 {
        out.push(fermat_point(anchors[0], anchors[1], anchors[2]));
    }
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            let d = norm.distance(anchors[i], anchors[j]);
            for ki in 1..=cap {
                let ri = T::from_i64(ki).unwrap();
                let lo = ((d - ri - eps).ceil().to_i64().unwrap()).max(1);
                let hi = ((d + ri + eps).floor().to_i64().unwrap()).min(cap);
                for kj in lo..=hi {
                    let rj = T::from_i64(kj).unwrap();
                    if (ri - rj).abs() > d + eps {
                        continue;
                    }
                    if norm.is_euclidean() {
                        out.extend(circle_contacts(Disk::new(anchors[i], ri), Disk::new(anchors[j], rj)));
                    } else {
                        out.extend(norm.sphere_intersections(anchors[i], ri, anchors[j], rj));
                    }
                }
            }
        }
    }
    if !norm.is_euclidean() {
        for a in anchors {
            for k in 1..=cap {
                out.extend(norm.sphere_corners(*a, T::from_i64(k).unwrap()));
            }
        }
    }
    out
}

/// Exact minimum of `sum ceil_eps(|anchor x|)` over `x`, with ties broken by
/// `tie`. Returns the optimum and the number of candidates evaluated.
pub fn best_meeting_point<T: Scalar>(norm: &Norm<T>, anchors: &[Point<T>], tie: TieBreak) -> (Meeting<T>, u64) {
    let candidates = meeting_candidates(norm, anchors);
    let scale = T::one().max(max_pairwise(norm, anchors));
    let off_anchor = T::lit(1e-9) * scale;
    let mut best: Option<Meeting<T>> = None;
    for &x in &candidates {
        let mut cost = 0i64;
        let mut length = T::zero();
        let mut clearance = T::infinity();
        for a in anchors {
            let d = norm.distance(*a, x);
            cost += ceil_eps(d);
            length = length + d;
            clearance = clearance.min(d);
        }
        let m = Meeting { point: x, cost, length, clearance };
        let better = match &best {
            None => true,
            Some(b) => {
                if m.cost != b.cost {
                    m.cost < b.cost
                } else {
                    let (mf, bf) = (m.clearance > off_anchor, b.clearance > off_anchor);
                    if tie == TieBreak::PreferFull && mf != bf {
                        mf
                    } else {
                        m.length < b.length - T::lit(1e-12) * scale
                    }
                }
            }
        };
        if better {
            best = Some(m);
        }
    }
    (best.expect("anchors are nonempty"), candidates.len() as u64)
}

/// Placement of an adjacent Steiner pair `A`-`B` where `A` also joins
/// `anchors[0], anchors[1]` and `B` joins `anchors[2], anchors[3]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairPlacement<T> {
    /// Sum of the five edge ceilings.
    pub cost: i64,
    pub a: Point<T>,
    pub b: Point<T>,
}

#[derive(Clone, Debug)]
pub struct PairSearch<T> {
    pub best: Option<PairPlacement<T>>,
    /// False when the placement budget ran out before the search finished.
    pub complete: bool,
    pub evaluated: u64,
}

struct SideLens<T> {
    ksum: i64,
    lens: Lens<T>,
    radii: (i64, i64),
}

fn side_lenses<T: Scalar>(p: Point<T>, q: Point<T>, others: (Point<T>, Point<T>), cap: i64, upper: i64) -> Vec<SideLens<T>> {
    let d = p.dist(q);
    let d_other = others.0.dist(others.1);
    let eps = T::lit(1e-9);
    let mut out = Vec::new();
    for kp in 0..=cap {
        let rp = T::from_i64(kp).unwrap();
        let lo = ((d - rp - eps).ceil().to_i64().unwrap()).max(0);
        let hi = ((d + rp + eps).floor().to_i64().unwrap()).min(cap);
        for kq in lo..=hi {
            let Some(lens) = Lens::new(Disk::new(p, rp), Disk::new(q, T::from_i64(kq).unwrap())) else {
                continue;
            };
            // The rest of the tree joins a point of this lens to both other
            // anchors, so it is at least a three-point Steiner tree.
            let dc = lens.distance_to_point(others.0);
            let dd = lens.distance_to_point(others.1);
            let rest = d_other.max(dc).max(dd).max((d_other + dc + dd) / T::lit(2.0));
            let rest_lb = (rest - eps).ceil().to_i64().unwrap().max(0);
            if kp + kq + rest_lb < upper {
                out.push(SideLens { ksum: kp + kq, lens, radii: (kp, kq) });
            }
        }
    }
    out.sort_by_key(|s| s.ksum);
    out
}

/// Exact minimum of the five-edge ceiling sum for a Steiner pair, searching
/// only for costs strictly below `upper`.
pub fn best_pair_placement<T: Scalar>(anchors: [Point<T>; 4], upper: i64, budget: u64) -> PairSearch<T> {
    let norm = Norm::Euclidean;
    let cap = radius_cap(&norm, &anchors);
    let mut upper = upper;
    let left = side_lenses(anchors[0], anchors[1], (anchors[2], anchors[3]), cap, upper);
    let right = side_lenses(anchors[2], anchors[3], (anchors[0], anchors[1]), cap, upper);
    let dist = |i: usize, j: usize| anchors[i].dist(anchors[j]);
    let cross = [(0, 2, dist(0, 2)), (0, 3, dist(0, 3)), (1, 2, dist(1, 2)), (1, 3, dist(1, 3))];
    let eps = T::lit(1e-9);
    let mut best = None;
    let mut evaluated = 0u64;
    let min_right = right.first().map_or(i64::MAX / 4, |s| s.ksum);
    for l in &left {
        if l.ksum + min_right >= upper {
            break;
        }
        for r in &right {
            if l.ksum + r.ksum >= upper {
                break;
            }
            let k = [l.radii.0, l.radii.1, r.radii.0, r.radii.1];
            let mut gap = T::zero();
            for &(i, j, dij) in &cross {
                gap = gap.max(dij - T::from_i64(k[i] + k[j]).unwrap());
            }
            let cheap = l.ksum + r.ksum + (gap - eps).ceil().to_i64().unwrap().max(0);
            if cheap >= upper {
                continue;
            }
            if evaluated >= budget {
                return PairSearch { best, complete: false, evaluated };
            }
            evaluated += 1;
            let (d, a, b) = lens_distance(&l.lens, &r.lens);
            let cost = l.ksum + r.ksum + ceil_eps(d);
            if cost < upper {
                // Re-measure from the witness points: that is what any tree
                // built from them will be charged.
                let actual: i64 = ceil_eps(anchors[0].dist(a))
                    + ceil_eps(anchors[1].dist(a))
                    + ceil_eps(anchors[2].dist(b))
                    + ceil_eps(anchors[3].dist(b))
                    + ceil_eps(a.dist(b));
                if actual < upper {
                    upper = actual;
                    best = Some(PairPlacement { cost: actual, a, b });
                }
            }
        }
    }
    PairSearch { best, complete: true, evaluated }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    #[test]
    fn meeting_point_equilateral() {
        let r = 1.2 / 3f64.sqrt();
        let pts: Vec<Point<f64>> = (0..3).map(|k| Point::polar(k as f64 * std::f64::consts::TAU / 3.0) * r).collect();
        let (m, _) = best_meeting_point(&Norm::Euclidean, &pts, TieBreak::Shortest);
        assert_eq!(m.cost, 3);
    }

    #[test]
    fn meeting_point_polygon_norm() {
        let l1 = Norm::l1();
        let pts = [p(0.0, 0.0), p(4.0, 1.0), p(2.0, 5.0)];
        let (m, _) = best_meeting_point(&l1, &pts, TieBreak::Shortest);
        assert_eq!(m.cost, 9);
    }

    #[test]
    fn pair_placement_on_unit_square() {
        // Corners of a 2x2 square. The Steiner tree is 2 + 2*sqrt(3) long, so
        // 6 is a lower bound, met by A = (0, 1), B = (2, 1).
        let a = [p(0.0, 0.0), p(0.0, 2.0), p(2.0, 0.0), p(2.0, 2.0)];
        let s = best_pair_placement(a, 100, u64::MAX);
        assert!(s.complete);
        let best = s.best.unwrap();
        assert_eq!(best.cost, 6);
    }
}
