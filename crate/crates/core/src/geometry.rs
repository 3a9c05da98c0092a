//! Planar convex hull (Andrew's monotone chain).

use thiserror::Error;

use crate::model::Point;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("convex hull of an empty point set")]
    Empty,
}

/// Twice the signed area of the triangle `o, a, b`; positive for a
/// counterclockwise turn.
#[inline]
pub fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Indices of the strict hull vertices of `points`, counterclockwise,
/// starting from the lexicographically smallest `(x, y)` vertex.
///
/// Coincident points are collapsed onto their smallest index and collinear
/// boundary points are dropped. One distinct point yields one index; an
/// all-collinear input yields its two extreme points.
pub fn convex_hull(points: &[Point]) -> Result<Vec<usize>, HullError> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.x.total_cmp(&pb.x)
            .then(pa.y.total_cmp(&pb.y))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|b, a| points[*a] == points[*b]);
    if idx.len() < 3 {
        return Ok(idx);
    }

    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2
            && cross(
                &points[hull[hull.len() - 2]],
                &points[hull[hull.len() - 1]],
                &points[i],
            ) <= 0.0
        {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(
                &points[hull[hull.len() - 2]],
                &points[hull[hull.len() - 1]],
                &points[i],
            ) <= 0.0
        {
            hull.pop();
        }
        hull.push(i);
    }
    // last point repeats the first
    hull.pop();
    Ok(hull)
}

/// True if `p` lies inside or on the boundary of the convex polygon given by
/// counterclockwise `vertices`.
pub fn contains(vertices: &[Point], p: &Point) -> bool {
    match vertices.len() {
        0 => false,
        1 => vertices[0] == *p,
        2 => {
            let (a, b) = (&vertices[0], &vertices[1]);
            cross(a, b, p) == 0.0
                && p.x >= a.x.min(b.x)
                && p.x <= a.x.max(b.x)
                && p.y >= a.y.min(b.y)
                && p.y <= a.y.max(b.y)
        }
        n => (0..n).all(|i| cross(&vertices[i], &vertices[(i + 1) % n], p) >= 0.0),
    }
}
