//! Plane points, lines and a few Euclidean primitives.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point (or vector) in the plane. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(serialize = "T: Copy + Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> From<[T; 2]> for Point<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Point { x, y }
    }
}

impl<T> From<Point<T>> for [T; 2] {
    fn from(p: Point<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub const fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn origin() -> Self {
        Point::new(T::zero(), T::zero())
    }

    /// Unit vector at angle `theta` (radians).
    #[inline]
    pub fn polar(theta: T) -> Self {
        Point::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    /// Euclidean length.
    #[inline]
    pub fn length(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).length()
    }

    /// Unit vector in the same direction; the zero vector maps to itself.
    pub fn normalized(self) -> Self {
        let l = self.length();
        if l == T::zero() {
            self
        } else {
            self * (T::one() / l)
        }
    }

    /// Counterclockwise rotation by `theta` radians.
    pub fn rotate(self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Perpendicular vector (rotated +90 degrees).
    #[inline]
    pub fn perp(self) -> Self {
        Point::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    /// Angle in `[0, pi]` between two nonzero vectors.
    pub fn angle_to(self, o: Self) -> T {
        self.cross(o).abs().atan2(self.dot(o))
    }

    /// Lexicographic comparison on `(x, y)`, NaN-free inputs assumed.
    pub fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(self.y.partial_cmp(&o.y).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn cast<U: Scalar>(self) -> Point<U> {
        Point::new(
            U::from_f64(self.x.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(U::nan),
            U::from_f64(self.y.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(U::nan),
        )
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Point::new(self.x * k, self.y * k)
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Point::new(-self.x, -self.y)
    }
}

/// An infinite line through `point` with direction `direction`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Copy + Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Line<T> {
    pub point: Point<T>,
    pub direction: Point<T>,
}

impl<T: Scalar> Line<T> {
    pub fn new(point: Point<T>, direction: Point<T>) -> Self {
        Line { point, direction }
    }

    /// Intersection point, or `None` for (near-)parallel lines.
    pub fn intersect(&self, other: &Line<T>) -> Option<Point<T>> {
        let denom = self.direction.cross(other.direction);
        let scale = self.direction.length() * other.direction.length();
        if denom.abs() <= T::lit(1e-14) * scale {
            return None;
        }
        let t = (other.point - self.point).cross(other.direction) / denom;
        Some(self.point + self.direction * t)
    }

    pub fn contains(&self, p: Point<T>, tol: T) -> bool {
        let d = self.direction.normalized();
        (p - self.point).cross(d).abs() <= tol
    }
}

/// Intersection points of two Euclidean circles.
///
/// Tangent circles yield a single point; concentric or separated circles
/// yield nothing. Near-tangency within `1e-12` relative is snapped to tangency.
pub fn circle_intersections<T: Scalar>(c1: Point<T>, r1: T, c2: Point<T>, r2: T) -> Vec<Point<T>> {
    let delta = c2 - c1;
    let d = delta.length();
    let slack = T::lit(1e-12) * (T::one() + r1 + r2);
    if d <= slack {
        return Vec::new();
    }
    if d > r1 + r2 + slack || d < (r1 - r2).abs() - slack {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (d + d);
    let h2 = r1 * r1 - a * a;
    let u = delta * (T::one() / d);
    let base = c1 + u * a;
    if h2 <= slack * slack.max(r1) {
        return vec![base];
    }
    let h = h2.sqrt();
    let off = u.perp() * h;
    vec![base + off, base - off]
}

/// Intersection of two closed segments; overlapping collinear segments return
/// the endpoints of the overlap.
pub fn segment_intersections<T: Scalar>(a0: Point<T>, a1: Point<T>, b0: Point<T>, b1: Point<T>, tol: T) -> Vec<Point<T>> {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.cross(db);
    let la = da.length();
    let lb = db.length();
    if la <= tol || lb <= tol {
        return Vec::new();
    }
    if denom.abs() <= T::lit(1e-13) * la * lb {
        // parallel: only collinear overlaps matter
        if (b0 - a0).cross(da).abs() / la > tol {
            return Vec::new();
        }
        let proj = |p: Point<T>| (p - a0).dot(da) / (la * la);
        let (mut t0, mut t1) = (proj(b0), proj(b1));
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        let lo = t0.max(T::zero());
        let hi = t1.min(T::one());
        let rel = tol / la;
        if lo > hi + rel {
            return Vec::new();
        }
        if (hi - lo).abs() <= rel {
            return vec![a0 + da * lo];
        }
        return vec![a0 + da * lo, a0 + da * hi];
    }
    let t = (b0 - a0).cross(db) / denom;
    let u = (b0 - a0).cross(da) / denom;
    let rt = tol / la;
    let ru = tol / lb;
    if t < -rt || t > T::one() + rt || u < -ru || u > T::one() + ru {
        return Vec::new();
    }
    vec![a0 + da * t.max(T::zero()).min(T::one())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_pairs() {
        let pts = circle_intersections(Point::new(0.0_f64, 0.0), 5.0, Point::new(8.0, 0.0), 5.0);
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert!((p.x - 4.0).abs() < 1e-12);
            assert!((p.y.abs() - 3.0).abs() < 1e-12);
        }
        let tangent = circle_intersections(Point::new(0.0, 0.0), 1.0, Point::new(2.0, 0.0), 1.0);
        assert_eq!(tangent.len(), 1);
        assert!(circle_intersections(Point::new(0.0, 0.0), 1.0, Point::new(3.0, 0.0), 1.0).is_empty());
        assert!(circle_intersections(Point::new(0.0, 0.0), 5.0, Point::new(1.0, 0.0), 1.0).is_empty());
    }

    #[test]
    fn segments() {
        let o = Point::new(0.0_f64, 0.0);
        let p = segment_intersections(o, Point::new(2.0, 2.0), Point::new(0.0, 2.0), Point::new(2.0, 0.0), 1e-12);
        assert_eq!(p.len(), 1);
        assert!((p[0].x - 1.0).abs() < 1e-12);
        let overlap = segment_intersections(o, Point::new(3.0, 0.0), Point::new(1.0, 0.0), Point::new(5.0, 0.0), 1e-12);
        assert_eq!(overlap.len(), 2);
        assert!(segment_intersections(o, Point::new(1.0, 0.0), Point::new(2.0, 1.0), Point::new(2.0, -1.0), 1e-12).is_empty());
    }

    #[test]
    fn line_intersection() {
        let l1 = Line::new(Point::new(0.0, 5.0), Point::new(1.0, 0.0));
        let l2 = Line::new(Point::new(2.0, 0.0), Point::new(0.0, 1.0));
        assert_eq!(l1.intersect(&l2), Some(Point::new(2.0, 5.0)));
        assert!(l1.intersect(&l1).is_none());
    }
}
