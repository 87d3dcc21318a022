//! Minkowski-plane norms: the Euclidean norm and norms whose unit ball is a
//! centrally symmetric convex polygon.

use crate::error::{Error, Result};
use crate::geometry::{circle_intersections, segment_intersections, Line, Point};
use crate::scalar::Scalar;

/// Absolute tolerance for the validation of polygon literals.
pub const VALIDATION_EPS: f64 = 1e-12;

/// A Minkowski plane norm.
#[derive(Clone, Debug, PartialEq)]
pub enum Norm<T> {
    Euclidean,
    Polygon(PolygonBall<T>),
}

/// A validated polygonal unit ball.
///
/// Vertices are counterclockwise, strictly convex and centrally symmetric,
/// with the origin strictly inside. Each edge `i -> i+1` carries the
/// supporting half-plane `normal . x <= offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonBall<T> {
    vertices: Vec<Point<T>>,
    normals: Vec<Point<T>>,
    offsets: Vec<T>,
}

impl<T: Scalar> PolygonBall<T> {
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self> {
        let n = vertices.len();
        let eps = T::lit(VALIDATION_EPS);
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidNorm(format!(
                "a centrally symmetric polygon needs an even number (>= 4) of vertices, got {n}"
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidNorm("non-finite vertex coordinate".into()));
        }
        let half = n / 2;
        for i in 0..half {
            let s = vertices[i] + vertices[i + half];
            if s.x.abs() > eps || s.y.abs() > eps {
                return Err(Error::InvalidNorm(format!(
                    "vertex {} is not the negation of vertex {}",
                    i + half,
                    i
                )));
            }
        }
        let mut winding = T::zero();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if a.cross(b) <= eps {
                return Err(Error::InvalidNorm(format!(
                    "origin is not strictly inside (edge {i} -> {})",
                    (i + 1) % n
                )));
            }
            if (b - a).cross(c - b) <= eps {
                return Err(Error::InvalidNorm(format!(
                    "vertex list is not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
            winding = winding + a.cross(b).atan2(a.dot(b));
        }
        if (winding - T::TAU()).abs() > T::lit(1e-9) {
            return Err(Error::InvalidNorm("vertex list winds around the origin more than once".into()));
        }
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let d = b - a;
            let normal = Point::new(d.y, -d.x);
            offsets.push(normal.dot(a));
            normals.push(normal);
        }
        Ok(PolygonBall { vertices, normals, offsets })
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    /// Gauge function `||v||` by locating the fan sector that contains `v`
    /// with a binary search, then scaling against that edge.
    pub fn gauge(&self, v: Point<T>) -> T {
        if v.x == T::zero() && v.y == T::zero() {
            return T::zero();
        }
        let half = self.vertices.len() / 2;
        // the ball is symmetric, so fold v into the upper fan [v_0, v_half]
        let v = if self.vertices[0].cross(v) >= T::zero() { v } else { -v };
        // largest i in [0, half-1] with cross(v_i, v) >= 0
        let (mut lo, mut hi) = (0usize, half - 1);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.vertices[mid].cross(v) >= T::zero() {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        self.normals[lo].dot(v) / self.offsets[lo]
    }

    /// Gauge evaluated as the maximum over all facet constraints. Linear in
    /// the vertex count; kept as an independent cross-check of [`Self::gauge`].
    pub fn gauge_by_facets(&self, v: Point<T>) -> T {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, c)| n.dot(v) / *c)
            .fold(T::zero(), T::max)
    }
}

impl<T: Scalar> Norm<T> {
    pub fn polygon(vertices: Vec<Point<T>>) -> Result<Self> {
        PolygonBall::new(vertices).map(Norm::Polygon)
    }

    /// The rectilinear norm; unit ball is the square with vertices on the axes.
    pub fn l1() -> Self {
        let (o, l) = (T::zero(), T::one());
        Norm::polygon(vec![Point::new(l, o), Point::new(o, l), Point::new(-l, o), Point::new(o, -l)])
            .expect("valid L1 ball")
    }

    /// The maximum norm; unit ball is the axis-aligned square.
    pub fn linf() -> Self {
        let l = T::one();
        Norm::polygon(vec![Point::new(l, l), Point::new(-l, l), Point::new(-l, -l), Point::new(l, -l)])
            .expect("valid Linf ball")
    }

    /// Regular polygon ball with `sides` vertices on the unit circle, the
    /// first at angle `rotation`.
    pub fn regular(sides: usize, rotation: T) -> Result<Self> {
        let step = T::TAU() / T::from_usize_lossy(sides);
        let vertices = (0..sides)
            .map(|k| Point::polar(rotation + step * T::from_usize_lossy(k)))
            .collect::<Vec<_>>();
        // snap exact negation so rounding in sin/cos never trips validation
        let half = sides / 2;
        let mut v = vertices;
        if sides % 2 == 0 {
            for i in 0..half {
                v[i + half] = -v[i];
            }
        }
        Norm::polygon(v)
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Norm::Euclidean)
    }

    pub fn ball(&self) -> Option<&PolygonBall<T>> {
        match self {
            Norm::Polygon(b) => Some(b),
            Norm::Euclidean => None,
        }
    }

    /// `||v||`.
    pub fn norm(&self, v: Point<T>) -> T {
        match self {
            Norm::Euclidean => v.length(),
            Norm::Polygon(b) => b.gauge(v),
        }
    }

    /// `d(p, q) = ||p - q||`.
    pub fn distance(&self, p: Point<T>, q: Point<T>) -> T {
        self.norm(q - p)
    }

    /// Boundary points shared by the spheres `S(c1, r1)` and `S(c2, r2)`.
    /// For polygon norms, overlapping boundary pieces contribute their
    /// endpoints.
    pub fn sphere_intersections(&self, c1: Point<T>, r1: T, c2: Point<T>, r2: T) -> Vec<Point<T>> {
        match self {
            Norm::Euclidean => circle_intersections(c1, r1, c2, r2),
            Norm::Polygon(b) => {
                if r1 <= T::zero() || r2 <= T::zero() {
                    return Vec::new();
                }
                let vs = b.vertices();
                let n = vs.len();
                let tol = T::lit(1e-12) * (T::one() + r1 + r2 + c1.length() + c2.length());
                let mut out: Vec<Point<T>> = Vec::new();
                for i in 0..n {
                    let a0 = c1 + vs[i] * r1;
                    let a1 = c1 + vs[(i + 1) % n] * r1;
                    for j in 0..n {
                        let b0 = c2 + vs[j] * r2;
                        let b1 = c2 + vs[(j + 1) % n] * r2;
                        for p in segment_intersections(a0, a1, b0, b1, tol) {
                            if !out.iter().any(|q| q.dist(p) <= tol * T::lit(10.0)) {
                                out.push(p);
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Corners of the sphere `S(c, r)`; empty for the Euclidean norm.
    pub fn sphere_corners(&self, c: Point<T>, r: T) -> Vec<Point<T>> {
        match self {
            Norm::Euclidean => Vec::new(),
            Norm::Polygon(b) => b.vertices().iter().map(|v| c + *v * r).collect(),
        }
    }
}

/// Coarse classification of a unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BallClass<T> {
    /// Four-vertex ball. Directions are unit vectors along the vertex-to-vertex
    /// diagonals; `major` is the longer one.
    Parallelogram { major: Point<T>, minor: Point<T> },
    Hexagon,
    OtherPolygon,
    Smooth,
}

impl<T: Scalar> BallClass<T> {
    pub fn is_parallelogram(&self) -> bool {
        matches!(self, BallClass::Parallelogram { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            BallClass::Parallelogram { .. } => "parallelogram",
            BallClass::Hexagon => "hexagon",
            BallClass::OtherPolygon => "otherPolygon",
            BallClass::Smooth => "smooth",
        }
    }
}

/// Picks the representative of `{d, -d}` that is lexicographically larger.
fn canonical_direction<T: Scalar>(d: Point<T>) -> Point<T> {
    if d.lex_cmp(&-d) == std::cmp::Ordering::Less {
        -d
    } else {
        d
    }
}

pub fn classify<T: Scalar>(norm: &Norm<T>) -> BallClass<T> {
    let ball = match norm {
        Norm::Euclidean => return BallClass::Smooth,
        Norm::Polygon(b) => b,
    };
    match ball.vertices().len() {
        4 => {
            let v = ball.vertices();
            let d0 = canonical_direction(v[0].normalized());
            let d1 = canonical_direction(v[1].normalized());
            let (l0, l1) = (v[0].length(), v[1].length());
            let tie = (l0 - l1).abs() <= T::lit(VALIDATION_EPS);
            let first_major = if tie { d0.lex_cmp(&d1) != std::cmp::Ordering::Less } else { l0 > l1 };
            let (major, minor) = if first_major { (d0, d1) } else { (d1, d0) };
            BallClass::Parallelogram { major, minor }
        }
        6 => BallClass::Hexagon,
        _ => BallClass::OtherPolygon,
    }
}

/// The lines `l1(t)` (major diagonal direction) and `l2(t)` (minor) through `t`.
pub fn diagonal_lines<T: Scalar>(class: &BallClass<T>, t: Point<T>) -> Result<(Line<T>, Line<T>)> {
    match class {
        BallClass::Parallelogram { major, minor } => Ok((Line::new(t, *major), Line::new(t, *minor))),
        other => Err(Error::Usage(format!("diagonal lines need a parallelogram ball, got {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    #[test]
    fn distance_examples() {
        let o = p(0.0, 0.0);
        let q = p(3.0, 4.0);
        assert_eq!(Norm::Euclidean.distance(o, q), 5.0);
        assert!((Norm::<f64>::l1().distance(o, q) - 7.0).abs() < 1e-12);
        assert!((Norm::<f64>::linf().distance(o, q) - 4.0).abs() < 1e-12);
        for n in [Norm::Euclidean, Norm::l1(), Norm::linf(), Norm::regular(6, 0.3).unwrap()] {
            assert_eq!(n.distance(q, q), 0.0);
        }
    }

    #[test]
    fn f32_distances() {
        let o = Point::<f32>::new(0.0, 0.0);
        let q = Point::<f32>::new(3.0, 4.0);
        assert!((Norm::<f32>::l1().distance(o, q) - 7.0).abs() < 1e-5);
        assert!((Norm::<f32>::Euclidean.distance(o, q) - 5.0).abs() < 1e-5);
    }

    #[test]
    fn listed_vertices_have_unit_norm() {
        for n in [Norm::<f64>::l1(), Norm::linf(), Norm::regular(6, 0.1).unwrap(), Norm::regular(8, 0.0).unwrap()] {
            let b = n.ball().unwrap();
            for v in b.vertices() {
                assert!((n.norm(*v) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_polygons() {
        // asymmetric
        assert!(Norm::polygon(vec![p(1.0, 0.0), p(0.0, 1.0), p(-1.0, 0.0), p(0.0, -2.0)]).is_err());
        // clockwise
        assert!(Norm::polygon(vec![p(1.0, 0.0), p(0.0, -1.0), p(-1.0, 0.0), p(0.0, 1.0)]).is_err());
        // a valid irregular hexagon
        assert!(Norm::polygon(vec![
            p(1.0, 0.0),
            p(1.0, 1.0),
            p(0.0, 1.0),
            p(-1.0, 0.0),
            p(-1.0, -1.0),
            p(0.0, -1.0)
        ])
        .is_ok());
        // not strictly convex (collinear middle vertex)
        assert!(Norm::polygon(vec![
            p(1.0, -1.0),
            p(1.0, 0.0),
            p(1.0, 1.0),
            p(-1.0, 1.0),
            p(-1.0, 0.0),
            p(-1.0, -1.0)
        ])
        .is_err());
        // too few vertices
        assert!(Norm::polygon(vec![p(1.0, 0.0), p(-1.0, 0.0)]).is_err());
        // odd count
        assert!(Norm::polygon(vec![p(1.0, 0.0), p(0.0, 1.0), p(-1.0, 0.0)]).is_err());
    }

    #[test]
    fn classification() {
        match classify(&Norm::<f64>::l1()) {
            BallClass::Parallelogram { major, minor } => {
                assert_eq!(major, p(1.0, 0.0));
                assert_eq!(minor, p(0.0, 1.0));
                assert!(major.dot(minor).abs() < 1e-15);
            }
            other => panic!("expected parallelogram, got {other:?}"),
        }
        match classify(&Norm::<f64>::linf()) {
            BallClass::Parallelogram { major, minor } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                assert!(major.dist(p(s, s)) < 1e-15);
                assert!(minor.dist(p(s, -s)) < 1e-15);
            }
            other => panic!("expected parallelogram, got {other:?}"),
        }
        assert_eq!(classify(&Norm::<f64>::regular(6, 0.0).unwrap()), BallClass::Hexagon);
        assert_eq!(classify(&Norm::<f64>::regular(8, 0.0).unwrap()), BallClass::OtherPolygon);
        assert_eq!(classify(&Norm::<f64>::Euclidean), BallClass::Smooth);
    }

    #[test]
    fn major_is_longer_diagonal() {
        let n = Norm::polygon(vec![p(2.0, 0.0), p(0.0, 1.0), p(-2.0, 0.0), p(0.0, -1.0)]).unwrap();
        assert_eq!(classify(&n), BallClass::Parallelogram { major: p(1.0, 0.0), minor: p(0.0, 1.0) });
        let n = Norm::polygon(vec![p(1.0, 0.0), p(0.0, 2.0), p(-1.0, 0.0), p(0.0, -2.0)]).unwrap();
        assert_eq!(classify(&n), BallClass::Parallelogram { major: p(0.0, 1.0), minor: p(1.0, 0.0) });
    }

    #[test]
    fn diagonal_line_examples() {
        let c = classify(&Norm::<f64>::l1());
        let (l1, l2) = diagonal_lines(&c, p(2.0, 5.0)).unwrap();
        assert!(l1.contains(p(-7.0, 5.0), 1e-12));
        assert!(l2.contains(p(2.0, 100.0), 1e-12));
        let (a, b) = diagonal_lines(&c, p(0.0, 0.0)).unwrap();
        assert!(a.contains(p(3.0, 0.0), 1e-12) && b.contains(p(0.0, -3.0), 1e-12));
        let (a, b) = diagonal_lines(&classify(&Norm::<f64>::linf()), p(0.0, 0.0)).unwrap();
        assert!(a.contains(p(1.0, 1.0), 1e-12) && b.contains(p(1.0, -1.0), 1e-12));
        assert!(diagonal_lines(&BallClass::<f64>::Hexagon, p(0.0, 0.0)).is_err());
    }

    #[test]
    fn polygon_sphere_intersections() {
        let n = Norm::<f64>::l1();
        let pts = n.sphere_intersections(p(0.0, 0.0), 2.0, p(2.0, 0.0), 2.0);
        // the two diamonds share boundary segments from (1,1) to (0,2) ... check every
        // returned point is on both spheres
        assert!(!pts.is_empty());
        for q in pts {
            assert!((n.distance(p(0.0, 0.0), q) - 2.0).abs() < 1e-9);
            assert!((n.distance(p(2.0, 0.0), q) - 2.0).abs() < 1e-9);
        }
    }

    fn arb_norm() -> impl Strategy<Value = Norm<f64>> {
        prop_oneof![
            Just(Norm::Euclidean),
            Just(Norm::l1()),
            Just(Norm::linf()),
            (0.0..1.0f64).prop_map(|r| Norm::regular(6, r).unwrap()),
            (0.0..1.0f64).prop_map(|r| Norm::regular(10, r).unwrap()),
            (0.2..3.0f64, 0.2..3.0f64, 0.3..2.8f64).prop_map(|(a, b, ang)| {
                let v0 = p(a, 0.0);
                let v1 = p(b * ang.cos(), b * ang.sin());
                Norm::polygon(vec![v0, v1, -v0, -v1]).unwrap()
            }),
        ]
    }

    fn arb_point() -> impl Strategy<Value = Point<f64>> {
        (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| p(x, y))
    }

    proptest! {
        #[test]
        fn metric_axioms(n in arb_norm(), a in arb_point(), b in arb_point(), c in arb_point()) {
            let ab = n.distance(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - n.distance(b, a)).abs() <= 1e-12 * (1.0 + ab));
            prop_assert!(n.distance(a, c) <= ab + n.distance(b, c) + 1e-9);
            prop_assert!(n.distance(a, a) == 0.0);
        }

        #[test]
        fn homogeneity(n in arb_norm(), v in arb_point(), lambda in -20.0..20.0f64) {
            let lhs = n.norm(v * lambda);
            let rhs = lambda.abs() * n.norm(v);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
        }
    }

    #[test]
    fn fan_search_matches_facet_maximum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let norms = [Norm::<f64>::l1(), Norm::linf(), Norm::regular(6, 0.2).unwrap(), Norm::regular(12, 0.05).unwrap()];
        for norm in &norms {
            let ball = norm.ball().unwrap();
            for _ in 0..1000 {
                let a = p(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
                let b = p(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
                let fast = norm.distance(a, b);
                let slow = ball.gauge_by_facets(b - a);
                assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");
            }
        }
    }
}
