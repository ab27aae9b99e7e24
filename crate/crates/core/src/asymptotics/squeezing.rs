use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::conformal::{disk_distance, RiemannMap};
use crate::domain::{DomainSpec, PlanarDomain, Shape};
use crate::error::{Error, Result};

/// Largest boundary deviation of the map accepted by the squeezing bound.
pub const SQUEEZING_MAP_ACCURACY: f64 = 1e-2;

const HOLE_SAMPLES: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingEstimate {
    pub z: C64,
    /// `tanh(disk_gap)`, or 1 when no hole is left after filling.
    pub lower_bound: f64,
    /// Disk distance from `phi(z)` to the image of the holes; `None` when there are none.
    pub disk_gap: Option<f64>,
    pub map_domain: String,
    pub map_origin: C64,
    pub map_accuracy: f64,
}

fn is_filled(domain: &PlanarDomain, index: usize) -> bool {
    match *domain.components()[index].shape() {
        Shape::Slit { start, end } => {
            let outer = &domain.components()[0];
            outer.nearest(start).0 <= 1e-9 || outer.nearest(end).0 <= 1e-9
        }
        _ => false,
    }
}

/// The simply connected domain bounded by the outer component, keeping
/// slits attached to it.
pub fn enveloping_domain(domain: &PlanarDomain) -> Result<PlanarDomain> {
    let spec = domain.spec();
    let components = spec
        .components
        .iter()
        .enumerate()
        .filter(|(i, _)| *i == 0 || is_filled(domain, *i))
        .map(|(_, c)| c.clone())
        .collect();
    PlanarDomain::new(DomainSpec {
        name: format!("envelope({})", spec.name),
        base_point: spec.base_point,
        components,
    })
}

/// Lower bound `tanh k_D(phi(z), phi(holes))` for the squeezing function at
/// `z`, where `phi` maps the enveloping domain onto the disk.
pub fn squeezing_lower_bound(
    domain: &PlanarDomain,
    z: C64,
    map: &RiemannMap,
) -> Result<SqueezingEstimate> {
    if !domain.contains(z)? {
        return Err(Error::OutsideDomain(z));
    }
    let env = map.domain();
    if env.components().len()
        != 1 + (1..domain.components().len())
            .filter(|&i| is_filled(domain, i))
            .count()
        || env.spec().components[0] != domain.spec().components[0]
    {
        return Err(Error::Precondition(format!(
            "map of `{}` is not a map of the enveloping domain of `{}`",
            env.name(),
            domain.name()
        )));
    }
    if map.accuracy() > SQUEEZING_MAP_ACCURACY {
        return Err(Error::Accuracy {
            achieved: map.accuracy(),
            required: SQUEEZING_MAP_ACCURACY,
            detail: format!("Riemann map of `{}`", env.name()),
        });
    }
    let w = map.forward(z)?;
    let mut gap: Option<f64> = None;
    for (i, comp) in domain.components().iter().enumerate().skip(1) {
        if is_filled(domain, i) {
            continue;
        }
        let dist = |t: f64| -> Result<f64> { Ok(disk_distance(w, map.forward(comp.point_at(t))?)) };
        let samples = comp.samples(HOLE_SAMPLES);
        let mut best = (f64::INFINITY, 0.0);
        for &(t, p) in &samples {
            let d = disk_distance(w, map.forward(p)?);
            if d < best.0 {
                best = (d, t);
            }
        }
        // Golden-section polish around the best sample.
        let step = 1.0 / samples.len() as f64;
        let (mut a, mut b) = (best.1 - step, best.1 + step);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..40 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if dist(c.rem_euclid(1.0))? < dist(d.rem_euclid(1.0))? {
                b = d;
            } else {
                a = c;
            }
        }
        let polished = dist((0.5 * (a + b)).rem_euclid(1.0))?.min(best.0);
        gap = Some(gap.map_or(polished, |g: f64| g.min(polished)));
    }
    let lower_bound = gap.map_or(1.0, |g| g.tanh().clamp(0.0, 1.0));
    Ok(SqueezingEstimate {
        z,
        lower_bound,
        disk_gap: gap,
        map_domain: env.spec().hash(),
        map_origin: map.origin(),
        map_accuracy: map.accuracy(),
    })
}
