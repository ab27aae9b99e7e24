use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::survey::{sample_region, SURVEY_MIN_DELTA};
use super::Rect;
use crate::domain::{ComponentSpec, DomainSpec, Orientation, PlanarDomain, Shape};
use crate::error::{Error, Result};
use crate::metric::MetricEngine;

/// Vertices used for a circular outer boundary before clipping.
const CIRCLE_VERTICES: usize = 4096;
/// Cells per side of the connectivity check.
const CONNECTIVITY_CELLS: usize = 256;

fn clip_half_plane(
    poly: &[C64],
    inside: impl Fn(C64) -> bool,
    cross: impl Fn(C64, C64) -> C64,
) -> Vec<C64> {
    let mut out = Vec::with_capacity(poly.len() + 4);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        match (inside(a), inside(b)) {
            (true, true) => out.push(b),
            (true, false) => out.push(cross(a, b)),
            (false, true) => {
                out.push(cross(a, b));
                out.push(b);
            }
            (false, false) => {}
        }
    }
    out
}

/// Sutherland–Hodgman clip of a closed polygon to `rect`.
fn clip(poly: &[C64], rect: &Rect) -> Vec<C64> {
    let at_x = |x: f64| {
        move |a: C64, b: C64| {
            let t = (x - a.re) / (b.re - a.re);
            C64::new(x, a.im + t * (b.im - a.im))
        }
    };
    let at_y = |y: f64| {
        move |a: C64, b: C64| {
            let t = (y - a.im) / (b.im - a.im);
            C64::new(a.re + t * (b.re - a.re), y)
        }
    };
    let (lo, hi) = (rect.lo, rect.hi);
    let p = clip_half_plane(poly, |z| z.re >= lo.re, at_x(lo.re));
    let p = clip_half_plane(&p, |z| z.re <= hi.re, at_x(hi.re));
    let p = clip_half_plane(&p, |z| z.im >= lo.im, at_y(lo.im));
    let mut p = clip_half_plane(&p, |z| z.im <= hi.im, at_y(hi.im));
    p.dedup_by(|a, b| (*a - *b).norm() <= 1e-12);
    while p.len() > 1 && (p[0] - p[p.len() - 1]).norm() <= 1e-12 {
        p.pop();
    }
    p
}

/// Number of 4-connected components of the cells of `rect` whose centres lie in `domain`.
fn grid_components(domain: &PlanarDomain, rect: &Rect) -> (usize, Vec<(C64, f64)>) {
    let n = CONNECTIVITY_CELLS;
    let (dx, dy) = (
        (rect.hi.re - rect.lo.re) / n as f64,
        (rect.hi.im - rect.lo.im) / n as f64,
    );
    let centre = |i: usize, j: usize| {
        C64::new(
            rect.lo.re + (i as f64 + 0.5) * dx,
            rect.lo.im + (j as f64 + 0.5) * dy,
        )
    };
    let mut cells = vec![false; n * n];
    let mut inside = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let z = centre(i, j);
            if domain.inside(z) {
                cells[j * n + i] = true;
                inside.push((z, domain.boundary_distance(z)));
            }
        }
    }
    let mut seen = vec![false; n * n];
    let mut count = 0;
    for start in 0..n * n {
        if !cells[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(k) = stack.pop() {
            let (i, j) = (k % n, k / n);
            let mut push = |m: usize| {
                if cells[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            };
            if i > 0 {
                push(k - 1);
            }
            if i + 1 < n {
                push(k + 1);
            }
            if j > 0 {
                push(k - n);
            }
            if j + 1 < n {
                push(k + n);
            }
        }
    }
    (count, inside)
}

fn disjoint(a: (C64, C64), rect: &Rect) -> bool {
    a.1.re < rect.lo.re || a.0.re > rect.hi.re || a.1.im < rect.lo.im || a.0.im > rect.hi.im
}

fn strictly_inside(a: (C64, C64), rect: &Rect) -> bool {
    a.0.re > rect.lo.re && a.1.re < rect.hi.re && a.0.im > rect.lo.im && a.1.im < rect.hi.im
}

/// `rect ∩ domain` as a domain of its own. The outer boundary is clipped as
/// a polygon; holes must lie entirely inside or entirely outside `rect`.
pub fn restrict_to_rectangle(domain: &PlanarDomain, rect: &Rect) -> Result<PlanarDomain> {
    if !rect.is_valid() {
        return Err(Error::Precondition("empty rectangle".into()));
    }
    let (count, cells) = grid_components(domain, rect);
    if count == 0 {
        return Err(Error::Precondition("rectangle misses the domain".into()));
    }
    if count > 1 {
        return Err(Error::UnsupportedTopology(format!(
            "the rectangle meets `{}` in {count} components",
            domain.name()
        )));
    }
    let outer = &domain.components()[0];
    let poly = match outer.shape() {
        Shape::Circle { .. } => outer
            .samples(CIRCLE_VERTICES)
            .into_iter()
            .map(|(_, p)| p)
            .collect(),
        _ => outer.outline(CIRCLE_VERTICES),
    };
    let clipped = clip(&poly, rect);
    if clipped.len() < 3 {
        return Err(Error::Precondition("rectangle misses the domain".into()));
    }
    let mut components = vec![ComponentSpec::Polyline {
        vertices: clipped.iter().map(|z| [z.re, z.im]).collect(),
        orientation: Some(Orientation::Ccw),
    }];
    for (i, comp) in domain.components().iter().enumerate().skip(1) {
        let b = comp.bounds();
        if disjoint(b, rect) {
            continue;
        }
        if !strictly_inside(b, rect) {
            return Err(Error::UnsupportedTopology(format!(
                "boundary component {i} of `{}` crosses the rectangle",
                domain.name()
            )));
        }
        components.push(domain.spec().components[i].clone());
    }
    let base = domain.base_point();
    let base = if rect.contains(base) && domain.boundary_distance(base) > 0.0 {
        base
    } else {
        cells
            .iter()
            .fold((base, f64::NEG_INFINITY), |acc, &(z, d)| {
                if d > acc.1 {
                    (z, d)
                } else {
                    acc
                }
            })
            .0
    };
    let spec = DomainSpec {
        name: format!(
            "clip({},{},{},{},{})",
            domain.name(),
            rect.lo.re,
            rect.lo.im,
            rect.hi.re,
            rect.hi.im
        ),
        base_point: [base.re, base.im],
        components,
    };
    let out = PlanarDomain::new(spec)?;
    if !out.inside(base) {
        return Err(Error::Geometry(format!(
            "no interior base point for the restriction of `{}`",
            domain.name()
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationEstimate {
    /// Largest `k_local(z, w) - k(z, w)` over the pairs.
    pub c_hat: f64,
    pub worst_pair: (C64, C64),
    /// Largest `k(z, w) - k_local(z, w)`; positive values break the left inequality.
    pub left_excess: f64,
    /// Pairs whose left excess is above `left_tolerance`.
    pub left_violations: usize,
    pub left_tolerance: f64,
    pub pairs: usize,
    pub seed: u64,
}

/// Compare the metric of `domain ∩ u` (carried by `local`) with that of the
/// domain itself (`global`) on seeded pairs from `w ∩ domain`.
pub fn localization_constant(
    global: &MetricEngine,
    local: &MetricEngine,
    u: &Rect,
    w: &Rect,
    pairs: usize,
    seed: u64,
) -> Result<LocalizationEstimate> {
    if !u.compactly_contains(w) {
        return Err(Error::Precondition(
            "W must be compactly contained in U".into(),
        ));
    }
    if pairs == 0 {
        return Err(Error::Precondition("no pairs requested".into()));
    }
    let left_tolerance = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_region(
        local.domain(),
        Some(w),
        SURVEY_MIN_DELTA,
        2 * pairs,
        &mut rng,
    )?;
    let mut c_hat = (f64::NEG_INFINITY, (pts[0], pts[1]));
    let mut left_excess = f64::NEG_INFINITY;
    let mut left_violations = 0;
    for p in pts.chunks(2) {
        let (z, x) = (p[0], p[1]);
        if !global.domain().inside(z) || !global.domain().inside(x) {
            return Err(Error::Geometry(format!(
                "{z} or {x} lies in U ∩ Ω but not in Ω"
            )));
        }
        let kg = global.distance(z, x)?;
        let kl = local.distance(z, x)?;
        if kl - kg > c_hat.0 {
            c_hat = (kl - kg, (z, x));
        }
        left_excess = left_excess.max(kg - kl);
        if kg - kl > left_tolerance {
            left_violations += 1;
        }
    }
    Ok(LocalizationEstimate {
        c_hat: c_hat.0,
        worst_pair: c_hat.1,
        left_excess,
        left_violations,
        left_tolerance,
        pairs,
        seed,
    })
}
