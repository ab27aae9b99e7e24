use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use super::geometry::{
    point_segment, segment_meets_circle, segments_intersect, signed_area, winding_number,
};

/// Geometric description of one boundary component.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Closed polyline; the closing edge from the last vertex back to the first is implicit.
    Polyline(Vec<C64>),
    Circle {
        center: C64,
        radius: f64,
    },
    /// Doubly traversed arc: `start -> end` on the first half of the parameter range,
    /// `end -> start` on the second.
    Slit {
        start: C64,
        end: C64,
    },
}

/// Whether a component bounds the domain from outside or encloses a hole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Outer,
    Inner,
}

/// A boundary component, stored with its traversal oriented so that the
/// domain lies on the left.
#[derive(Clone, Debug)]
pub struct BoundaryComponent {
    shape: Shape,
    role: Role,
    cumulative: Vec<f64>,
}

impl BoundaryComponent {
    pub fn new(shape: Shape, role: Role) -> Self {
        let shape = match shape {
            Shape::Polyline(mut vertices) => {
                if vertices.len() > 1 && (vertices[0] - vertices[vertices.len() - 1]).norm() == 0.0
                {
                    vertices.pop();
                }
                let area = signed_area(&vertices);
                let want_ccw = role == Role::Outer;
                if (area > 0.0) != want_ccw {
                    vertices.reverse();
                }
                Shape::Polyline(vertices)
            }
            other => other,
        };
        let cumulative = match &shape {
            Shape::Polyline(v) => {
                let n = v.len();
                let mut acc = Vec::with_capacity(n + 1);
                acc.push(0.0);
                for i in 0..n {
                    let last = acc[i];
                    acc.push(last + (v[(i + 1) % n] - v[i]).norm());
                }
                acc
            }
            _ => Vec::new(),
        };
        BoundaryComponent {
            shape,
            role,
            cumulative,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.shape, Shape::Slit { .. })
    }

    pub fn length(&self) -> f64 {
        match &self.shape {
            Shape::Polyline(_) => *self.cumulative.last().unwrap_or(&0.0),
            Shape::Circle { radius, .. } => TAU * radius,
            Shape::Slit { start, end } => 2.0 * (end - start).norm(),
        }
    }

    fn orientation_sign(&self) -> f64 {
        match self.role {
            Role::Outer => 1.0,
            Role::Inner => -1.0,
        }
    }

    fn polyline_edge(&self, t: f64) -> (usize, f64) {
        let total = self.length();
        let s = t.rem_euclid(1.0) * total;
        let n = self.cumulative.len() - 1;
        let idx = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(n - 1),
            Err(i) => (i - 1).min(n - 1),
        };
        let len = self.cumulative[idx + 1] - self.cumulative[idx];
        let frac = if len > 0.0 {
            (s - self.cumulative[idx]) / len
        } else {
            0.0
        };
        (idx, frac.clamp(0.0, 1.0))
    }

    /// Coordinate at traversal parameter `t` in `[0, 1)`.
    pub fn point_at(&self, t: f64) -> C64 {
        let t = t.rem_euclid(1.0);
        match &self.shape {
            Shape::Polyline(v) => {
                let (i, f) = self.polyline_edge(t);
                let a = v[i];
                let b = v[(i + 1) % v.len()];
                a + (b - a) * f
            }
            Shape::Circle { center, radius } => {
                center + C64::from_polar(*radius, self.orientation_sign() * TAU * t)
            }
            Shape::Slit { start, end } => {
                if t < 0.5 {
                    start + (end - start) * (2.0 * t)
                } else {
                    end + (start - end) * (2.0 * t - 1.0)
                }
            }
        }
    }

    /// Unit tangent in the traversal direction.
    pub fn tangent_at(&self, t: f64) -> C64 {
        let t = t.rem_euclid(1.0);
        match &self.shape {
            Shape::Polyline(v) => {
                let n = v.len();
                let (i, f) = self.polyline_edge(t);
                let edge = |k: usize| {
                    let d = v[(k + 1) % n] - v[k];
                    d / d.norm()
                };
                let here = edge(i);
                if f < 1e-12 {
                    let prev = edge((i + n - 1) % n);
                    let m = here + prev;
                    if m.norm() > 1e-12 {
                        return m / m.norm();
                    }
                }
                here
            }
            Shape::Circle { .. } => {
                let sign = self.orientation_sign();
                C64::from_polar(1.0, sign * TAU * t) * C64::new(0.0, sign)
            }
            Shape::Slit { start, end } => {
                let d = (end - start) / (end - start).norm();
                if t < 0.5 {
                    d
                } else {
                    -d
                }
            }
        }
    }

    /// Unit normal pointing into the domain (left of the traversal).
    pub fn inward_normal(&self, t: f64) -> C64 {
        self.tangent_at(t) * C64::i()
    }

    /// Nearest point of the component to `z`: `(distance, point, parameter)`.
    /// For slits the parameter returned is on the first (`start -> end`) pass.
    pub fn nearest(&self, z: C64) -> (f64, C64, f64) {
        match &self.shape {
            Shape::Polyline(v) => {
                let n = v.len();
                let total = self.length();
                let mut best = (f64::INFINITY, z, 0.0);
                for i in 0..n {
                    let (d, p, s) = point_segment(z, v[i], v[(i + 1) % n]);
                    if d < best.0 {
                        let len = self.cumulative[i + 1] - self.cumulative[i];
                        best = (d, p, (self.cumulative[i] + s * len) / total);
                    }
                }
                best
            }
            Shape::Circle { center, radius } => {
                let r = z - center;
                let rn = r.norm();
                let dir = if rn > 0.0 { r / rn } else { C64::new(1.0, 0.0) };
                let p = center + dir * *radius;
                let mut t = (self.orientation_sign() * dir.arg() / TAU).rem_euclid(1.0);
                if t >= 1.0 {
                    t = 0.0;
                }
                ((rn - radius).abs(), p, t)
            }
            Shape::Slit { start, end } => {
                let (d, p, s) = point_segment(z, *start, *end);
                (d, p, 0.5 * s)
            }
        }
    }

    /// Winding number of the traversal around `z` (zero for slits).
    pub fn winding(&self, z: C64) -> i32 {
        match &self.shape {
            Shape::Polyline(v) => winding_number(v, z),
            Shape::Circle { center, radius } => {
                if (z - center).norm() < *radius {
                    self.orientation_sign() as i32
                } else {
                    0
                }
            }
            Shape::Slit { .. } => 0,
        }
    }

    /// Whether the closed segment `[a, b]` meets this component.
    pub fn meets_segment(&self, a: C64, b: C64, tol: f64) -> bool {
        match &self.shape {
            Shape::Polyline(v) => {
                let n = v.len();
                (0..n).any(|i| segments_intersect(a, b, v[i], v[(i + 1) % n], tol))
            }
            Shape::Circle { center, radius } => segment_meets_circle(a, b, *center, *radius, tol),
            Shape::Slit { start, end } => segments_intersect(a, b, *start, *end, tol),
        }
    }

    /// Traversal samples `(parameter, point)`, roughly uniform in arclength.
    /// Polyline vertices are always included so corners are represented exactly.
    pub fn samples(&self, n: usize) -> Vec<(f64, C64)> {
        let n = n.max(3);
        match &self.shape {
            Shape::Polyline(v) => {
                let total = self.length();
                let m = v.len();
                let mut out = Vec::with_capacity(n + m);
                for i in 0..m {
                    let len = self.cumulative[i + 1] - self.cumulative[i];
                    let pieces = ((len / total) * n as f64).round().max(1.0) as usize;
                    let a = v[i];
                    let b = v[(i + 1) % m];
                    for k in 0..pieces {
                        let f = k as f64 / pieces as f64;
                        out.push(((self.cumulative[i] + f * len) / total, a + (b - a) * f));
                    }
                }
                out
            }
            _ => (0..n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    (t, self.point_at(t))
                })
                .collect(),
        }
    }

    /// Closed polyline approximation (vertices only) used for pairwise checks.
    pub fn outline(&self, n: usize) -> Vec<C64> {
        match &self.shape {
            Shape::Polyline(v) => v.clone(),
            Shape::Slit { start, end } => vec![*start, *end],
            Shape::Circle { .. } => self.samples(n).into_iter().map(|(_, p)| p).collect(),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (C64, C64) {
        match &self.shape {
            Shape::Polyline(v) => v.iter().fold(
                (
                    C64::new(f64::INFINITY, f64::INFINITY),
                    C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
                ),
                |(lo, hi), p| {
                    (
                        C64::new(lo.re.min(p.re), lo.im.min(p.im)),
                        C64::new(hi.re.max(p.re), hi.im.max(p.im)),
                    )
                },
            ),
            Shape::Circle { center, radius } => (
                center - C64::new(*radius, *radius),
                center + C64::new(*radius, *radius),
            ),
            Shape::Slit { start, end } => (
                C64::new(start.re.min(end.re), start.im.min(end.im)),
                C64::new(start.re.max(end.re), start.im.max(end.im)),
            ),
        }
    }
}
