//! Three-terminal Steiner trees for norms whose unit ball is a parallelogram.
//!
//! Writing every point in the basis of the ball's diagonals, the Steiner point
//! is the coordinate-wise median and the tree length is half the perimeter of
//! the enclosing diagonal-aligned parallelogram.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::{classify, BallClass, Norm};
use crate::scalar::Scalar;
use crate::tree::EmbeddedTree;

/// A point where the three balls `B(t_i, r_i)` meet, with the radii
/// `r_i = |t_i x|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct TessellationResult<T> {
    pub point: Point<T>,
    pub radii: [T; 3],
    /// `|t_i x| + |t_j x| = |t_i t_j|` holds for all pairs within `1e-9 * max(1, diam)`.
    pub is_tessellation: bool,
}

fn diagonals<T: Scalar>(norm: &Norm<T>) -> Result<(Point<T>, Point<T>)> {
    match classify(norm) {
        BallClass::Parallelogram { major, minor } => Ok((major, minor)),
        other => Err(Error::Usage(format!("parallelogram norm required, got {:?}", other.tag()))),
    }
}

/// Coordinates of `t` in the `(major, minor)` basis.
fn coords<T: Scalar>(major: Point<T>, minor: Point<T>, t: Point<T>) -> (T, T) {
    let det = major.cross(minor);
    (t.cross(minor) / det, major.cross(t) / det)
}

fn median3<T: Scalar>(mut v: [T; 3]) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[1]
}

/// Checks the pairwise tessellation equations at `x`.
pub fn tessellation_check<T: Scalar>(norm: &Norm<T>, terminals: [Point<T>; 3], x: Point<T>) -> TessellationResult<T> {
    let radii = [0, 1, 2].map(|i| norm.distance(terminals[i], x));
    let scale = T::one()
        .max(norm.distance(terminals[0], terminals[1]))
        .max(norm.distance(terminals[1], terminals[2]))
        .max(norm.distance(terminals[0], terminals[2]));
    let tol = T::lit(1e-9) * scale;
    let ok = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .all(|&(i, j)| (radii[i] + radii[j] - norm.distance(terminals[i], terminals[j])).abs() <= tol);
    TessellationResult { point: x, radii, is_tessellation: ok }
}

/// Steiner minimal tree on three terminals in a parallelogram norm, as a
/// star centred on the median point (zero-length edges when the median is a
/// terminal).
pub fn parallelogram_smt3<T: Scalar>(
    norm: &Norm<T>,
    terminals: [Point<T>; 3],
) -> Result<(EmbeddedTree<T>, TessellationResult<T>)> {
    let (major, minor) = diagonals(norm)?;
    let c = terminals.map(|t| coords(major, minor, t));
    let a = median3(c.map(|p| p.0));
    let b = median3(c.map(|p| p.1));
    let x = major * a + minor * b;
    let tree = EmbeddedTree::from_parts(
        &[("t1", terminals[0]), ("t2", terminals[1]), ("t3", terminals[2])],
        &[("s1", x)],
        &[("t1", "s1"), ("t2", "s1"), ("t3", "s1")],
        norm.clone(),
    )?;
    Ok((tree, tessellation_check(norm, terminals, x)))
}

/// Smallest diagonal-aligned parallelogram containing the terminals, as
/// corners (counterclockwise in the diagonal basis) and half its perimeter
/// measured in the norm.
pub fn enclosing_diagonalized_parallelogram<T: Scalar>(
    norm: &Norm<T>,
    terminals: &[Point<T>],
) -> Result<([Point<T>; 4], T)> {
    let (major, minor) = diagonals(norm)?;
    if terminals.is_empty() {
        return Err(Error::Usage("need at least one terminal".into()));
    }
    let c: Vec<(T, T)> = terminals.iter().map(|&t| coords(major, minor, t)).collect();
    let (amin, amax) = c.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (bmin, bmax) = c.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let at = |a: T, b: T| major * a + minor * b;
    let corners = [at(amin, bmin), at(amax, bmin), at(amax, bmax), at(amin, bmax)];
    let half = norm.norm(major * (amax - amin)) + norm.norm(minor * (bmax - bmin));
    Ok((corners, half))
}

/// The tessellation point computed independently of the median rule:
/// radii from `r_i = (d_ij + d_ik - d_jk) / 2`, then the common point of the
/// three spheres. `None` when the spheres have no common point.
pub fn tessellation_point_by_radii<T: Scalar>(norm: &Norm<T>, t: [Point<T>; 3]) -> Option<Point<T>> {
    let d = |i: usize, j: usize| norm.distance(t[i], t[j]);
    let two = T::lit(2.0);
    let r = [
        (d(0, 1) + d(0, 2) - d(1, 2)) / two,
        (d(0, 1) + d(1, 2) - d(0, 2)) / two,
        (d(0, 2) + d(1, 2) - d(0, 1)) / two,
    ];
    let scale = T::one().max(d(0, 1)).max(d(0, 2)).max(d(1, 2));
    let tol = T::lit(1e-9) * scale;
    // A zero radius pins the point to that terminal.
    if let Some(i) = (0..3).find(|&i| r[i] <= tol) {
        return Some(t[i]);
    }
    let mut candidates = norm.sphere_intersections(t[0], r[0], t[1], r[1]);
    candidates.extend(norm.sphere_intersections(t[0], r[0], t[2], r[2]));
    candidates.extend(norm.sphere_intersections(t[1], r[1], t[2], r[2]));
    candidates.into_iter().find(|&x| (0..3).all(|i| (norm.distance(t[i], x) - r[i]).abs() <= tol))
}
