use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Rect, DEFAULT_D0};
use crate::domain::{BoundaryPoint, PlanarDomain};
use crate::error::{Error, Result};
use crate::metric::MetricEngine;

/// `(x|y)_o = (k(x, o) + k(y, o) - k(x, y)) / 2`.
pub fn gromov_product(engine: &MetricEngine, o: C64, x: C64, y: C64) -> Result<f64> {
    Ok(0.5 * (engine.distance(x, o)? + engine.distance(y, o)? - engine.distance(x, y)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub worst_quadruple: [C64; 4],
    pub quadruples: usize,
    pub seed: Option<u64>,
}

/// `max min((x|y)_w, (y|z)_w) - (x|z)_w` over all labelings of a quadruple,
/// from its six pairwise distances (`d[i][j]`).
fn quadruple_delta(d: &[[f64; 4]; 4]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for w in 0..4 {
        let g = |a: usize, b: usize| 0.5 * (d[a][w] + d[b][w] - d[a][b]);
        let others: Vec<usize> = (0..4).filter(|&i| i != w).collect();
        for &y in &others {
            let (x, z) = {
                let rest: Vec<usize> = others.iter().copied().filter(|&i| i != y).collect();
                (rest[0], rest[1])
            };
            best = best.max(g(x, y).min(g(y, z)) - g(x, z));
        }
    }
    best
}

/// Four-point δ over explicit quadruples.
pub fn four_point_delta(engine: &MetricEngine, quadruples: &[[C64; 4]]) -> Result<DeltaEstimate> {
    if quadruples.is_empty() {
        return Err(Error::Precondition("no quadruples".into()));
    }
    let mut best = (f64::NEG_INFINITY, quadruples[0]);
    for q in quadruples {
        let mut d = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i + 1..4 {
                d[i][j] = engine.distance(q[i], q[j])?;
                d[j][i] = d[i][j];
            }
        }
        let v = quadruple_delta(&d);
        if v > best.0 {
            best = (v, *q);
        }
    }
    Ok(DeltaEstimate {
        delta_hat: best.0,
        worst_quadruple: best.1,
        quadruples: quadruples.len(),
        seed: None,
    })
}

/// Seeded points of `domain` inside `region` (whole domain when `None`) with
/// boundary distance at least `min_delta`.
pub fn sample_region(
    domain: &PlanarDomain,
    region: Option<&Rect>,
    min_delta: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<C64>> {
    let (mut lo, mut hi) = domain.bounding_box();
    if let Some(r) = region {
        lo = C64::new(lo.re.max(r.lo.re), lo.im.max(r.lo.im));
        hi = C64::new(hi.re.min(r.hi.re), hi.im.min(r.hi.im));
    }
    if !(lo.re < hi.re && lo.im < hi.im) {
        return Err(Error::Precondition(
            "sampling region misses the domain".into(),
        ));
    }
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count + 100_000 {
            return Err(Error::Precondition(format!(
                "sampling region has too few points with boundary distance >= {min_delta}"
            )));
        }
        let z = C64::new(rng.gen_range(lo.re..hi.re), rng.gen_range(lo.im..hi.im));
        if domain.inside(z) && domain.boundary_distance(z) >= min_delta {
            out.push(z);
        }
    }
    Ok(out)
}

/// Minimum boundary distance of sampled points.
pub const SURVEY_MIN_DELTA: f64 = 0.05;

/// Four-point δ over `sample_count` seeded quadruples from `region`.
pub fn delta_hyperbolicity_estimate(
    engine: &MetricEngine,
    sample_count: usize,
    region: Option<&Rect>,
    seed: u64,
) -> Result<DeltaEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_region(
        engine.domain(),
        region,
        SURVEY_MIN_DELTA,
        4 * sample_count,
        &mut rng,
    )?;
    let quads: Vec<[C64; 4]> = pts.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    let mut est = four_point_delta(engine, &quads)?;
    est.seed = Some(seed);
    Ok(est)
}

fn distinct(p: &BoundaryPoint, q: &BoundaryPoint) -> Result<()> {
    if (p.coordinate - q.coordinate).norm() <= 1e-12 && p.side_hint == q.side_hint {
        return Err(Error::Precondition(format!(
            "boundary points coincide at {}",
            p.coordinate
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    /// Smallest Euclidean distance from a connecting segment to the core.
    pub min_core_distance: f64,
    /// Largest such distance; zero when every segment meets the core.
    pub max_core_distance: f64,
    /// Per-pair distance to the core, `None` where the segment failed.
    pub core_distances: Vec<Option<f64>>,
    pub gromov_products: Vec<Option<f64>>,
    pub gromov_sup: f64,
    pub failures: Vec<String>,
    pub core_delta: f64,
}

/// Geodesic segments between paired points of approach sequences to `xi1`
/// and `xi2`. The core is `{delta >= core_delta}`; the distance of a point
/// `v` to it is bounded below by `core_delta - delta(v)`, and this bound is
/// used for every vertex.
pub fn visibility_probe(
    engine: &MetricEngine,
    o: C64,
    xi1: &BoundaryPoint,
    xi2: &BoundaryPoint,
    n: usize,
    core_delta: f64,
) -> Result<VisibilityEstimate> {
    distinct(xi1, xi2)?;
    let domain = engine.domain();
    let a = domain.approach_sequence(xi1, n, DEFAULT_D0)?;
    let b = domain.approach_sequence(xi2, n, DEFAULT_D0)?;
    let mut core_distances = Vec::with_capacity(n);
    let mut products = Vec::with_capacity(n);
    let mut failures = Vec::new();
    for (k, (&x, &y)) in a.points.iter().zip(&b.points).enumerate() {
        match engine.geodesic(x, y) {
            Ok(path) => {
                let d = path
                    .vertices
                    .iter()
                    .map(|&v| (core_delta - domain.boundary_distance(v)).max(0.0))
                    .fold(f64::INFINITY, f64::min);
                core_distances.push(Some(d));
            }
            Err(e) => {
                failures.push(format!("pair {k}: {e}"));
                core_distances.push(None);
            }
        }
        products.push(gromov_product(engine, o, x, y).ok());
    }
    let found: Vec<f64> = core_distances.iter().flatten().copied().collect();
    if found.is_empty() {
        return Err(Error::Convergence(format!(
            "no connecting segment could be built: {}",
            failures.join("; ")
        )));
    }
    Ok(VisibilityEstimate {
        min_core_distance: found.iter().copied().fold(f64::INFINITY, f64::min),
        max_core_distance: found.iter().copied().fold(0.0, f64::max),
        core_distances,
        gromov_sup: products
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
        gromov_products: products,
        failures,
        core_delta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationEstimate {
    pub liminf_hat: f64,
    pub worst_pair: (C64, C64),
}

/// `min k(x_i, y_j)` over the tails `i, j >= n/2` of approach sequences to `p` and `q`.
pub fn boundary_separation_test(
    engine: &MetricEngine,
    p: &BoundaryPoint,
    q: &BoundaryPoint,
    n: usize,
) -> Result<SeparationEstimate> {
    distinct(p, q)?;
    if n == 0 {
        return Err(Error::Precondition(
            "approach sequences need at least one point".into(),
        ));
    }
    let domain = engine.domain();
    let a = domain.approach_sequence(p, n, DEFAULT_D0)?;
    let b = domain.approach_sequence(q, n, DEFAULT_D0)?;
    let mut best = (f64::INFINITY, (a.points[0], b.points[0]));
    for &x in &a.points[n / 2..] {
        for &y in &b.points[n / 2..] {
            let k = engine.distance(x, y)?;
            if k < best.0 {
                best = (k, (x, y));
            }
        }
    }
    Ok(SeparationEstimate {
        liminf_hat: best.0,
        worst_pair: best.1,
    })
}
