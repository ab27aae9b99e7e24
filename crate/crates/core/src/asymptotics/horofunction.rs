use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sup_gap, Thresholds};
use crate::domain::{ApproachSequence, PlanarDomain};
use crate::error::{Error, Result};
use crate::metric::{GeodesicPath, MetricEngine, PathKind};

/// Finite set of interior points on which functions are sampled. The first
/// point is the base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub points: Vec<C64>,
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

impl ProbeSet {
    pub const DEFAULT_COUNT: usize = 24;
    pub const DEFAULT_MIN_DELTA: f64 = 0.1;

    /// The domain's base point followed by randomly shifted Halton points
    /// with boundary distance at least `min_delta`, `count` points in all.
    pub fn seeded(domain: &PlanarDomain, count: usize, min_delta: f64, seed: u64) -> Result<Self> {
        let base = domain.base_point();
        Self::seeded_at(domain, base, count, min_delta, seed)
    }

    pub fn default_for(domain: &PlanarDomain, seed: u64) -> Result<Self> {
        Self::seeded(domain, Self::DEFAULT_COUNT, Self::DEFAULT_MIN_DELTA, seed)
    }

    /// As [`seeded`](Self::seeded) with an explicit base point.
    pub fn seeded_at(
        domain: &PlanarDomain,
        base: C64,
        count: usize,
        min_delta: f64,
        seed: u64,
    ) -> Result<Self> {
        if !domain.contains(base)? {
            return Err(Error::OutsideDomain(base));
        }
        let (lo, hi) = domain.bounding_box();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: (f64, f64) = (rng.gen(), rng.gen());
        let mut points = vec![base];
        let mut k = 1u64;
        while points.len() < count {
            if k > 1_000_000 {
                return Err(Error::Geometry(format!(
                    "found only {} probes with boundary distance >= {min_delta}",
                    points.len()
                )));
            }
            let u = (radical_inverse(k, 2) + shift.0).fract();
            let v = (radical_inverse(k, 3) + shift.1).fract();
            k += 1;
            let z = C64::new(lo.re + u * (hi.re - lo.re), lo.im + v * (hi.im - lo.im));
            if domain.inside(z) && domain.boundary_distance(z) >= min_delta {
                points.push(z);
            }
        }
        Ok(ProbeSet { points })
    }

    pub fn new(points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("a probe set needs a base point".into()));
        }
        Ok(ProbeSet { points })
    }

    pub fn base_point(&self) -> C64 {
        self.points[0]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check(&self, domain: &PlanarDomain) -> Result<()> {
        for &p in &self.points {
            if !domain.contains(p)? {
                return Err(Error::OutsideDomain(p));
            }
        }
        Ok(())
    }
}

/// What produced a horofunction sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampleSource {
    Psi {
        x: C64,
    },
    Busemann {
        origin: C64,
        landing: Option<C64>,
        t_max: f64,
    },
    Limit {
        target: C64,
        side_hint: Option<C64>,
        points: usize,
    },
}

/// A function on the probes, normalised to vanish at the base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorofunctionSample {
    pub probes: ProbeSet,
    pub values: Vec<f64>,
    pub source: SampleSource,
    /// Sup-norm gap between the last two iterates; zero for a single evaluation.
    pub cauchy_gap: f64,
    pub converged: bool,
    /// Value at the base point before normalisation.
    pub base_offset: f64,
}

impl HorofunctionSample {
    /// Sup-norm distance to another sample on the same probes.
    pub fn gap(&self, other: &HorofunctionSample) -> Result<f64> {
        if self.probes != other.probes {
            return Err(Error::Precondition(
                "samples live on different probe sets".into(),
            ));
        }
        Ok(sup_gap(&self.values, &other.values))
    }

    /// Values before base-point normalisation.
    pub fn unnormalized(&self) -> Vec<f64> {
        self.values.iter().map(|v| v + self.base_offset).collect()
    }

    pub fn base_value(&self) -> f64 {
        self.values[0]
    }
}

fn normalized(raw: Vec<f64>) -> (Vec<f64>, f64) {
    let base = raw[0];
    (raw.into_iter().map(|v| v - base).collect(), base)
}

/// `y -> k(x, y) - k(x, p)` on the probes.
pub fn psi_sample(engine: &MetricEngine, x: C64, probes: &ProbeSet) -> Result<HorofunctionSample> {
    let domain = engine.domain();
    if !domain.contains(x)? {
        return Err(Error::OutsideDomain(x));
    }
    probes.check(domain)?;
    let raw = engine.distances_from(x, &probes.points)?;
    let (values, base_offset) = normalized(raw);
    Ok(HorofunctionSample {
        probes: probes.clone(),
        values,
        source: SampleSource::Psi { x },
        cauchy_gap: 0.0,
        converged: true,
        base_offset,
    })
}

/// Un-normalised Busemann iterates `f_t(y) = k(y, g(t)) - k(g(t), g(0))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusemannIterates {
    pub schedule: Vec<f64>,
    /// `raw[k][i]` is `f_{t_k}` at probe `i`.
    pub raw: Vec<Vec<f64>>,
    /// Largest `f_{t_{k+1}}(y) - f_{t_k}(y)` over probes and steps.
    pub max_increase: f64,
}

pub fn busemann_iterates(
    engine: &MetricEngine,
    ray: &GeodesicPath,
    probes: &ProbeSet,
    schedule: &[f64],
) -> Result<BusemannIterates> {
    if ray.kind != PathKind::Ray {
        return Err(Error::Precondition("Busemann functions need a ray".into()));
    }
    check_schedule(schedule, ray.parameter_length())?;
    probes.check(engine.domain())?;
    let origin = ray.start();
    let mut raw = Vec::with_capacity(schedule.len());
    for &t in schedule {
        let g = ray.point_at(t);
        let reach = engine.distance(g, origin)?;
        let d = engine.distances_from(g, &probes.points)?;
        raw.push(d.into_iter().map(|v| v - reach).collect::<Vec<_>>());
    }
    let max_increase = raw
        .windows(2)
        .flat_map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BusemannIterates {
        schedule: schedule.to_vec(),
        raw,
        max_increase,
    })
}

pub(crate) fn check_schedule(schedule: &[f64], t_max: f64) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Precondition("empty t schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] < 0.0 {
        return Err(Error::Precondition(
            "t schedule must be increasing and non-negative".into(),
        ));
    }
    let last = *schedule.last().unwrap();
    if last > t_max * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "ray is defined up to {t_max}, schedule reaches {last}"
        )));
    }
    Ok(())
}

/// Busemann function of `ray` on the probes: the last iterate of
/// [`busemann_iterates`], normalised at the base point. Iterates that
/// increase by more than the monotonicity slack are a metric accuracy error.
pub fn busemann_eval(
    engine: &MetricEngine,
    ray: &GeodesicPath,
    probes: &ProbeSet,
    schedule: &[f64],
    thresholds: &Thresholds,
) -> Result<HorofunctionSample> {
    let it = busemann_iterates(engine, ray, probes, schedule)?;
    if it.max_increase > thresholds.monotone_slack {
        return Err(Error::MetricAccuracy(format!(
            "Busemann iterates increase by {:.3e} (slack {:.1e})",
            it.max_increase, thresholds.monotone_slack
        )));
    }
    let n = it.raw.len();
    let (values, base_offset) = normalized(it.raw[n - 1].clone());
    let cauchy_gap = if n > 1 {
        sup_gap(&values, &normalized(it.raw[n - 2].clone()).0)
    } else {
        0.0
    };
    Ok(HorofunctionSample {
        probes: probes.clone(),
        values,
        source: SampleSource::Busemann {
            origin: ray.start(),
            landing: ray.landing.map(|b| b.coordinate),
            t_max: *schedule.last().unwrap(),
        },
        cauchy_gap,
        converged: cauchy_gap <= thresholds.cauchy_gap,
        base_offset,
    })
}

/// Limit of `psi_sample(x_n)` along an approach sequence. A Cauchy gap above
/// the threshold is reported through `converged`, not as an error.
pub fn horofunction_limit(
    engine: &MetricEngine,
    seq: &ApproachSequence,
    probes: &ProbeSet,
    thresholds: &Thresholds,
) -> Result<HorofunctionSample> {
    if seq.points.is_empty() {
        return Err(Error::Precondition("empty approach sequence".into()));
    }
    let mut previous: Option<HorofunctionSample> = None;
    let mut cauchy_gap = 0.0;
    for &x in &seq.points {
        let s = psi_sample(engine, x, probes)?;
        if let Some(p) = &previous {
            cauchy_gap = sup_gap(&p.values, &s.values);
        }
        previous = Some(s);
    }
    let mut s = previous.unwrap();
    s.source = SampleSource::Limit {
        target: seq.target.coordinate,
        side_hint: seq.target.side_hint,
        points: seq.points.len(),
    };
    s.cauchy_gap = cauchy_gap;
    s.converged = cauchy_gap <= thresholds.cauchy_gap;
    Ok(s)
}

/// Largest `|v(y) - v(y')| - k(y, y')` over probe pairs; at most the
/// Lipschitz slack for a genuine horofunction sample.
pub fn lipschitz_excess(engine: &MetricEngine, sample: &HorofunctionSample) -> Result<f64> {
    let pts = &sample.probes.points;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let k = engine.distance(pts[i], pts[j])?;
            worst = worst.max((sample.values[i] - sample.values[j]).abs() - k);
        }
    }
    Ok(worst)
}
