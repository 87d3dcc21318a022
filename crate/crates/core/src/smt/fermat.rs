//! Single-point minimizers: Fermat points (three points) and geometric
//! medians (any number, with multiplicity), Euclidean and polygonal.

use crate::geometry::{Line, Point};
use crate::norms::PolygonBall;
use crate::scalar::Scalar;

/// Minimizer of `|ax| + |bx| + |cx|` in the Euclidean plane.
///
/// Coincident inputs return the repeated point; an angle of at least 120
/// degrees returns its vertex.
pub fn fermat_point<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>) -> Point<T> {
    let scale = T::one().max(a.x.abs()).max(a.y.abs()).max(b.x.abs()).max(b.y.abs()).max(c.x.abs()).max(c.y.abs());
    let tiny = T::epsilon() * T::lit(16.0) * scale;
    let (ab, bc, ca) = (a.dist(b), b.dist(c), c.dist(a));
    if ab <= tiny || ca <= tiny {
        return a;
    }
    if bc <= tiny {
        return b;
    }
    let wide = T::lit(2.0) * T::FRAC_PI_3();
    let angle_a = (b - a).angle_to(c - a);
    let angle_b = (a - b).angle_to(c - b);
    let angle_c = (a - c).angle_to(b - c);
    if angle_a >= wide {
        return a;
    }
    if angle_b >= wide {
        return b;
    }
    if angle_c >= wide {
        return c;
    }
    // barycentric a*csc(A + pi/3) : b*csc(B + pi/3) : c*csc(C + pi/3)
    let third = T::FRAC_PI_3();
    let wa = bc / (angle_a + third).sin();
    let wb = ca / (angle_b + third).sin();
    let wc = ab / (angle_c + third).sin();
    let total = wa + wb + wc;
    Point::new((a.x * wa + b.x * wb + c.x * wc) / total, (a.y * wa + b.y * wb + c.y * wc) / total)
}

/// Euclidean geometric median of `points` (repeats act as weights).
///
/// A data point is returned when it satisfies the optimality test (the pull
/// of the others does not exceed its multiplicity); otherwise Weiszfeld
/// iteration runs to relative precision `1e-15` or 10^5 steps.
pub fn geometric_median<T: Scalar>(points: &[Point<T>]) -> Point<T> {
    match points.len() {
        0 => return Point::origin(),
        1 => return points[0],
        3 => return fermat_point(points[0], points[1], points[2]),
        _ => {}
    }
    let scale = points.iter().fold(T::one(), |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let same = T::lit(1e-13) * scale;
    for p in points {
        let mut mult = T::zero();
        let mut pull = Point::origin();
        for q in points {
            let d = p.dist(*q);
            if d <= same {
                mult = mult + T::one();
            } else {
                pull = pull + (*q - *p) * (T::one() / d);
            }
        }
        if pull.length() <= mult * (T::one() + T::lit(1e-12)) {
            return *p;
        }
    }
    let inv = T::one() / T::from_usize_lossy(points.len());
    let mut x = points.iter().fold(Point::origin(), |s, p| s + *p) * inv;
    for _ in 0..10_000 {
        let mut num = Point::origin();
        let mut den = T::zero();
        for q in points {
            let d = x.dist(*q).max(same);
            num = num + *q * (T::one() / d);
            den = den + T::one() / d;
        }
        let next = num * (T::one() / den);
        let moved = next.dist(x);
        x = next;
        if moved <= T::lit(1e-13) * scale {
            break;
        }
    }
    x
}

/// Exact minimizer of `sum ||x - t_i||` for a polygon norm.
///
/// The objective is convex and piecewise linear with breaklines through each
/// terminal along the ball's vertex directions, so the minimum is attained at
/// a terminal or at a crossing of two breaklines. Among minimizers the one
/// farthest (in the norm) from its nearest terminal is returned, which picks
/// a non-degenerate Steiner point whenever one exists among the candidates.
pub fn polygon_fermat_point<T: Scalar>(ball: &PolygonBall<T>, terminals: &[Point<T>]) -> Point<T> {
    let candidates = polygon_breakpoints(ball, terminals);
    let f = |x: Point<T>| terminals.iter().map(|t| ball.gauge(x - *t)).sum::<T>();
    let scale = terminals.iter().fold(T::one(), |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let tie = T::lit(1e-12) * scale;
    let best = candidates.iter().map(|&c| f(c)).fold(T::infinity(), T::min);
    let mut chosen = terminals[0];
    let mut clearance = -T::one();
    for &c in &candidates {
        if f(c) <= best + tie {
            let near = terminals.iter().map(|t| ball.gauge(c - *t)).fold(T::infinity(), T::min);
            if near > clearance + tie {
                clearance = near;
                chosen = c;
            }
        }
    }
    chosen
}

/// Terminals plus all pairwise crossings of their breaklines.
pub fn polygon_breakpoints<T: Scalar>(ball: &PolygonBall<T>, terminals: &[Point<T>]) -> Vec<Point<T>> {
    let dirs: Vec<Point<T>> = ball.vertices()[..ball.vertices().len() / 2].to_vec();
    let mut out: Vec<Point<T>> = terminals.to_vec();
    for i in 0..terminals.len() {
        for j in i + 1..terminals.len() {
            for &u in &dirs {
                for &v in &dirs {
                    if let Some(p) = Line::new(terminals[i], u).intersect(&Line::new(terminals[j], v)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::Norm;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn cost(x: Point<f64>, pts: &[Point<f64>]) -> f64 {
        pts.iter().map(|q| x.dist(*q)).sum()
    }

    #[test]
    fn fermat_examples() {
        let h = 3f64.sqrt() / 2.0;
        let f = fermat_point(p(0.0, 0.0), p(1.0, 0.0), p(0.5, h));
        assert!((f.x - 0.5).abs() < 1e-12 && (f.y - 3f64.sqrt() / 6.0).abs() < 1e-12);
        assert_eq!(fermat_point(p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)), p(1.0, 0.0));
        assert_eq!(fermat_point(p(0.0, 0.0), p(4.0, 0.0), p(2.0, 0.1)), p(2.0, 0.1));
        assert_eq!(fermat_point(p(1.0, 1.0), p(1.0, 1.0), p(5.0, 0.0)), p(1.0, 1.0));
    }

    #[test]
    fn fermat_in_f32() {
        let h = 3f32.sqrt() / 2.0;
        let f = fermat_point(Point::new(0.0f32, 0.0), Point::new(1.0, 0.0), Point::new(0.5, h));
        assert!((f.x - 0.5).abs() < 1e-6 && (f.y - 3f32.sqrt() / 6.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn fermat_beats_nearby_points(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0,
            cx in -5.0f64..5.0, cy in -5.0f64..5.0,
        ) {
            let pts = [p(ax, ay), p(bx, by), p(cx, cy)];
            let f = fermat_point(pts[0], pts[1], pts[2]);
            let base = cost(f, &pts);
            for k in 0..16 {
                let q = f + Point::polar(k as f64 * std::f64::consts::PI / 8.0) * 1e-4;
                prop_assert!(cost(q, &pts) >= base - 1e-10);
            }
        }

        #[test]
        fn median_matches_fermat_on_triples(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0,
            cx in -5.0f64..5.0, cy in -5.0f64..5.0,
        ) {
            let pts = [p(ax, ay), p(bx, by), p(cx, cy), p(cx, cy)];
            let m = geometric_median(&pts);
            let base = cost(m, &pts);
            for k in 0..16 {
                let q = m + Point::polar(k as f64 * std::f64::consts::PI / 8.0) * 1e-4;
                prop_assert!(cost(q, &pts) >= base - 1e-9);
            }
        }
    }

    #[test]
    fn polygon_fermat_on_l1_is_componentwise_median() {
        let l1 = Norm::<f64>::l1();
        let ball = l1.ball().unwrap();
        let pts = [p(0.0, 0.0), p(4.0, 1.0), p(2.0, 5.0)];
        let x = polygon_fermat_point(ball, &pts);
        let f: f64 = pts.iter().map(|t| l1.distance(x, *t)).sum();
        assert!((f - 9.0).abs() < 1e-12);
        assert!((x.x - 2.0).abs() < 1e-12 && (x.y - 1.0).abs() < 1e-12);
    }
}
