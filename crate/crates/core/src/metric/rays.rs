//! Geodesic rays as limits of segments, and quasi-geodesic certificates.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::path::{GeodesicPath, MetricEngine, PathKind};
use crate::domain::{ApproachSequence, BoundaryPoint};
use crate::error::{Error, Result};

/// Seed for every randomised check unless the caller overrides it.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayOptions {
    /// Segments are used once their endpoint is this much further than `t_max`.
    pub margin: f64,
    /// Euclidean Hausdorff distance at which consecutive segments agree.
    pub tolerance: f64,
    /// Length of the default radial approach sequence.
    pub sequence_length: usize,
    /// Parameter samples per segment in the Hausdorff comparison.
    pub samples: usize,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            margin: 3.0,
            tolerance: 1e-3,
            sequence_length: 32,
            samples: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiGeodesicCertificate {
    pub lambda: f64,
    pub kappa: f64,
    pub checked_pairs: usize,
    /// Largest amount by which a pair breaks either inequality; `<= 0` means valid.
    pub worst_violation: f64,
    pub worst_pair: Option<(f64, f64)>,
    pub seed: u64,
}

impl QuasiGeodesicCertificate {
    pub fn is_valid(&self) -> bool {
        self.worst_violation <= 0.0
    }
}

/// Discrete Hausdorff distance between two point clouds.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one_sided = |p: &[C64], q: &[C64]| {
        p.iter()
            .map(|x| {
                q.iter()
                    .map(|y| (x - y).norm_sqr())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .sqrt()
    };
    one_sided(a, b).max(one_sided(b, a))
}

fn trace(path: &GeodesicPath, t_max: f64, n: usize) -> Vec<C64> {
    (0..=n)
        .map(|k| path.point_at(t_max * k as f64 / n as f64))
        .collect()
}

impl MetricEngine {
    /// Ray from `o` landing at `target`, along the default radial approach.
    pub fn geodesic_ray(&self, o: C64, target: &BoundaryPoint, t_max: f64) -> Result<GeodesicPath> {
        self.geodesic_ray_with(o, target, t_max, &RayOptions::default())
    }

    pub fn geodesic_ray_with(
        &self,
        o: C64,
        target: &BoundaryPoint,
        t_max: f64,
        opts: &RayOptions,
    ) -> Result<GeodesicPath> {
        let reach = (target.coordinate - o).norm();
        let seq = self.domain().approach_sequence(
            target,
            opts.sequence_length,
            (0.5 * reach).min(0.25),
        )?;
        self.geodesic_ray_along(o, &seq, t_max, opts)
    }

    /// Ray from `o` as the limit of segments to the points of `seq`.
    pub fn geodesic_ray_along(
        &self,
        o: C64,
        seq: &ApproachSequence,
        t_max: f64,
        opts: &RayOptions,
    ) -> Result<GeodesicPath> {
        if !(t_max > 0.0) {
            return Err(Error::Precondition(format!(
                "ray length must be positive, got {t_max}"
            )));
        }
        let mut previous: Option<(GeodesicPath, Vec<C64>)> = None;
        let mut last_gap = f64::INFINITY;
        let mut seed: Option<Vec<C64>> = None;
        for &x in &seq.points {
            // Warm start from the previous segment extended to the new point.
            let initial = seed
                .take()
                .filter(|p| !self.domain().segment_hits_boundary(*p.last().unwrap(), x))
                .map(|mut p| {
                    p.push(x);
                    p
                });
            let seg = self.geodesic_seeded(o, x, initial)?;
            seed = Some(seg.vertices.clone());
            if seg.length < t_max + opts.margin {
                continue;
            }
            let head = seg.truncated(t_max);
            let pts = trace(&head, t_max, opts.samples);
            if let Some((_, prev)) = &previous {
                last_gap = hausdorff(prev, &pts);
                if last_gap <= opts.tolerance {
                    let mut ray = head;
                    ray.kind = PathKind::Ray;
                    ray.landing = Some(seq.target);
                    return Ok(ray);
                }
            }
            previous = Some((head, pts));
        }
        let message = match &previous {
            None => format!(
                "no approach point is {} beyond t_max = {t_max} from {o}; extend the sequence",
                opts.margin
            ),
            Some((p, _)) => format!(
                "segments to {} did not stabilise on [0, {t_max}]: last Hausdorff gap {last_gap:.3e}, last segment ends at {}",
                seq.target.coordinate,
                p.end()
            ),
        };
        Err(Error::Convergence(message))
    }

    /// Check `|s - t| / lambda - kappa <= k(g(s), g(t)) <= lambda |s - t| + kappa`
    /// on `samples` seeded random parameter pairs.
    pub fn quasi_geodesic_check(
        &self,
        path: &GeodesicPath,
        lambda: f64,
        kappa: f64,
        samples: usize,
        seed: u64,
    ) -> Result<QuasiGeodesicCertificate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = path.parameter_length();
        let mut worst = f64::NEG_INFINITY;
        let mut worst_pair = None;
        for _ in 0..samples {
            let s = rng.gen::<f64>() * total;
            let t = rng.gen::<f64>() * total;
            let k = self.distance(path.point_at(s), path.point_at(t))?;
            let gap = (s - t).abs();
            let v = (gap / lambda - kappa - k).max(k - lambda * gap - kappa);
            if v > worst {
                worst = v;
                worst_pair = Some((s, t));
            }
        }
        Ok(QuasiGeodesicCertificate {
            lambda,
            kappa,
            checked_pairs: samples,
            worst_violation: if samples == 0 { 0.0 } else { worst },
            worst_pair,
            seed,
        })
    }
}
