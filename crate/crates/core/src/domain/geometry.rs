//! Planar segment primitives shared by the domain and metric code.

use num_complex::Complex64 as C64;

/// 2D cross product of `a` and `b` viewed as vectors.
#[inline]
pub fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
pub fn dot(a: C64, b: C64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Closest point on segment `[a, b]` to `z`, as `(distance, point, fraction)`.
pub fn point_segment(z: C64, a: C64, b: C64) -> (f64, C64, f64) {
    let d = b - a;
    let len2 = d.norm_sqr();
    let s = if len2 == 0.0 {
        0.0
    } else {
        (dot(z - a, d) / len2).clamp(0.0, 1.0)
    };
    let p = a + d * s;
    ((z - p).norm(), p, s)
}

/// Whether the closed segments `[p1, p2]` and `[q1, q2]` share a point,
/// with touching counted when within `tol`.
pub fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64, tol: f64) -> bool {
    let min_p = (p1.re.min(p2.re), p1.im.min(p2.im));
    let max_p = (p1.re.max(p2.re), p1.im.max(p2.im));
    let min_q = (q1.re.min(q2.re), q1.im.min(q2.im));
    let max_q = (q1.re.max(q2.re), q1.im.max(q2.im));
    if min_p.0 > max_q.0 + tol
        || min_q.0 > max_p.0 + tol
        || min_p.1 > max_q.1 + tol
        || min_q.1 > max_p.1 + tol
    {
        return false;
    }
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    segment_distance(p1, p2, q1, q2) <= tol
}

/// Euclidean distance between two closed segments.
pub fn segment_distance(p1: C64, p2: C64, q1: C64, q2: C64) -> f64 {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    point_segment(p1, q1, q2)
        .0
        .min(point_segment(p2, q1, q2).0)
        .min(point_segment(q1, p1, p2).0)
        .min(point_segment(q2, p1, p2).0)
}

/// Whether the segment `[a, b]` meets the circle `|z - c| = r` within `tol`.
pub fn segment_meets_circle(a: C64, b: C64, c: C64, r: f64, tol: f64) -> bool {
    let (near, _, _) = point_segment(c, a, b);
    let far = (a - c).norm().max((b - c).norm());
    near <= r + tol && far >= r - tol
}

/// Winding number of the closed polyline `vertices` around `z`.
pub fn winding_number(vertices: &[C64], z: C64) -> i32 {
    let n = vertices.len();
    let mut wn = 0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if a.im <= z.im {
            if b.im > z.im && cross(b - a, z - a) > 0.0 {
                wn += 1;
            }
        } else if b.im <= z.im && cross(b - a, z - a) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Signed area of a closed polyline (positive when counterclockwise).
pub fn signed_area(vertices: &[C64]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| cross(vertices[i], vertices[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn crossing_segments_intersect() {
        assert!(segments_intersect(
            c(0., 0.),
            c(1., 1.),
            c(0., 1.),
            c(1., 0.),
            0.0
        ));
        assert!(!segments_intersect(
            c(0., 0.),
            c(1., 0.),
            c(0., 1.),
            c(1., 1.),
            1e-12
        ));
    }

    #[test]
    fn touching_counts_within_tolerance() {
        assert!(segments_intersect(
            c(0., 0.),
            c(1., 0.),
            c(1., 0.),
            c(1., 1.),
            1e-12
        ));
        assert!(segments_intersect(
            c(0., 0.),
            c(2., 0.),
            c(1., 0.),
            c(1., 1.),
            1e-12
        ));
    }

    #[test]
    fn square_winding() {
        let sq = [c(0., 0.), c(1., 0.), c(1., 1.), c(0., 1.)];
        assert_eq!(winding_number(&sq, c(0.5, 0.5)), 1);
        assert_eq!(winding_number(&sq, c(1.5, 0.5)), 0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(winding_number(&rev, c(0.5, 0.5)), -1);
        assert!(signed_area(&sq) > 0.0);
    }

    #[test]
    fn circle_meeting() {
        assert!(segment_meets_circle(
            c(0., 0.),
            c(2., 0.),
            c(0., 0.),
            1.0,
            0.0
        ));
        assert!(!segment_meets_circle(
            c(0., 0.),
            c(0.5, 0.),
            c(0., 0.),
            1.0,
            0.0
        ));
        assert!(!segment_meets_circle(
            c(3., 0.),
            c(3., 1.),
            c(0., 0.),
            1.0,
            0.0
        ));
    }
}
