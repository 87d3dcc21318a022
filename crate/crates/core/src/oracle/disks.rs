//! Intersections of closed Euclidean disks ("lenses") and exact distances
//! between them. The bead oracle reduces a Steiner pair to the distance
//! between two lenses of integer radii.

use crate::geometry::{circle_intersections, Point};
use crate::scalar::{Scalar, MEMBERSHIP_EPS};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> Disk<T> {
    pub fn new(center: Point<T>, radius: T) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        p.dist(self.center) <= self.radius + T::lit(MEMBERSHIP_EPS)
    }

    /// Closest point of the disk to `p`.
    pub fn project(&self, p: Point<T>) -> Point<T> {
        let d = p.dist(self.center);
        if d <= self.radius {
            p
        } else {
            self.center + (p - self.center) * (self.radius / d)
        }
    }
}

/// Points where two circles meet, plus the touching point of circles that
/// miss tangency by at most `1e-9` (so the epsilon ceiling still sees them).
pub fn circle_contacts<T: Scalar>(a: Disk<T>, b: Disk<T>) -> Vec<Point<T>> {
    let pts = circle_intersections(a.center, a.radius, b.center, b.radius);
    if !pts.is_empty() {
        return pts;
    }
    let delta = b.center - a.center;
    let d = delta.length();
    let tol = T::lit(1e-9);
    if d <= tol {
        return Vec::new();
    }
    let u = delta * (T::one() / d);
    if (d - (a.radius + b.radius)).abs() <= tol {
        // external tangency: split the gap evenly
        let slack = (d - a.radius - b.radius) / T::lit(2.0);
        return vec![a.center + u * (a.radius + slack)];
    }
    if (d - (a.radius - b.radius).abs()).abs() <= tol {
        return if a.radius >= b.radius { vec![a.center + u * a.radius] } else { vec![a.center - u * a.radius] };
    }
    Vec::new()
}

/// Nonempty intersection of one or two disks. Contained disks are dropped,
/// so `disks` holds only the ones contributing boundary.
#[derive(Clone, Debug)]
pub struct Lens<T> {
    pub disks: Vec<Disk<T>>,
    pub vertices: Vec<Point<T>>,
}

impl<T: Scalar> Lens<T> {
    pub fn new(a: Disk<T>, b: Disk<T>) -> Option<Self> {
        let d = a.center.dist(b.center);
        let tol = T::lit(MEMBERSHIP_EPS);
        if d > a.radius + b.radius + tol {
            return None;
        }
        if d + b.radius <= a.radius + tol {
            return Some(Lens::disk(b));
        }
        if d + a.radius <= b.radius + tol {
            return Some(Lens::disk(a));
        }
        let vertices = circle_contacts(a, b);
        if vertices.is_empty() {
            return None;
        }
        Some(Lens { disks: vec![a, b], vertices })
    }

    pub fn disk(d: Disk<T>) -> Self {
        let vertices = if d.radius <= T::zero() { vec![d.center] } else { Vec::new() };
        Lens { disks: vec![d], vertices }
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        self.disks.iter().all(|d| d.contains(p))
    }

    /// Closest point of the lens to `p`.
    pub fn closest(&self, p: Point<T>) -> Point<T> {
        if self.contains(p) {
            return p;
        }
        let mut best = None;
        let mut best_d = T::infinity();
        let mut consider = |q: Point<T>| {
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = Some(q);
            }
        };
        for d in &self.disks {
            let q = d.project(p);
            if self.contains(q) {
                consider(q);
            }
        }
        for &v in &self.vertices {
            consider(v);
        }
        best.unwrap_or(self.vertices.first().copied().unwrap_or(self.disks[0].center))
    }

    pub fn distance_to_point(&self, p: Point<T>) -> T {
        self.closest(p).dist(p)
    }

    /// Some point of the lens.
    pub fn any_point(&self) -> Point<T> {
        if let Some(v) = self.vertices.first() {
            return *v;
        }
        self.disks[0].center
    }
}

/// Minimum distance between two lenses with a witness pair.
pub fn lens_distance<T: Scalar>(l1: &Lens<T>, l2: &Lens<T>) -> (T, Point<T>, Point<T>) {
    // Any nonempty intersection of disks contains a pairwise contact point of
    // its circles or an entire disk (hence its center).
    let mut probes: Vec<Point<T>> = Vec::new();
    probes.extend(l1.vertices.iter().copied());
    probes.extend(l2.vertices.iter().copied());
    for a in &l1.disks {
        for b in &l2.disks {
            probes.extend(circle_contacts(*a, *b));
        }
    }
    probes.extend(l1.disks.iter().map(|d| d.center));
    probes.extend(l2.disks.iter().map(|d| d.center));
    if let Some(&x) = probes.iter().find(|&&x| l1.contains(x) && l2.contains(x)) {
        return (T::zero(), x, x);
    }
    let mut best = (T::infinity(), l1.any_point(), l2.any_point());
    let mut consider = |p: Point<T>, q: Point<T>| {
        let d = p.dist(q);
        if d < best.0 {
            best = (d, p, q);
        }
    };
    for a in &l1.disks {
        for b in &l2.disks {
            let delta = b.center - a.center;
            let d = delta.length();
            if d > a.radius + b.radius {
                let u = delta * (T::one() / d);
                let p = a.center + u * a.radius;
                let q = b.center - u * b.radius;
                if l1.contains(p) && l2.contains(q) {
                    consider(p, q);
                }
            }
        }
    }
    for &v in &l1.vertices {
        consider(v, l2.closest(v));
    }
    for &w in &l2.vertices {
        consider(l1.closest(w), w);
    }
    best
}
