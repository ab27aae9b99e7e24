//! Bucket index over the boundary for fast distance and membership queries.

use num_complex::Complex64 as C64;

use super::component::{BoundaryComponent, Shape};
use super::geometry::point_segment;

#[derive(Clone, Copy, Debug)]
enum Prim {
    Segment { a: C64, b: C64 },
    Circle { center: C64, radius: f64 },
}

impl Prim {
    fn distance(&self, z: C64) -> f64 {
        match *self {
            Prim::Segment { a, b } => point_segment(z, a, b).0,
            Prim::Circle { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }

    fn jet(&self, z: C64) -> BoundaryJet {
        match *self {
            Prim::Segment { a, b } => {
                let (d, p, f) = point_segment(z, a, b);
                let normal = if d > 0.0 {
                    (z - p) / d
                } else {
                    C64::new(0.0, 0.0)
                };
                let curvature = if f > 0.0 && f < 1.0 { 0.0 } else { 1.0 / d };
                BoundaryJet {
                    delta: d,
                    point: p,
                    normal,
                    curvature,
                }
            }
            Prim::Circle { center, radius } => {
                let rel = z - center;
                let rho = rel.norm();
                let dir = if rho > 0.0 {
                    rel / rho
                } else {
                    C64::new(1.0, 0.0)
                };
                let p = center + dir * radius;
                let (normal, curvature) = if rho > radius {
                    (dir, 1.0 / rho)
                } else {
                    (-dir, -1.0 / rho)
                };
                BoundaryJet {
                    delta: (rho - radius).abs(),
                    point: p,
                    normal,
                    curvature,
                }
            }
        }
    }
}

/// Distance to the boundary with first and second derivatives:
/// `grad delta = normal` and `hess delta = curvature * (I - normal normal^T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryJet {
    pub delta: f64,
    pub point: C64,
    pub normal: C64,
    pub curvature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CellState {
    Inside,
    Outside,
    Mixed,
}

#[derive(Clone, Debug)]
pub(crate) struct BoundaryIndex {
    prims: Vec<Prim>,
    lo: C64,
    cell: f64,
    n: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
    states: Vec<CellState>,
}

impl BoundaryIndex {
    pub(crate) fn build(
        components: &[BoundaryComponent],
        bbox: (C64, C64),
        classify: impl Fn(C64) -> bool,
    ) -> Self {
        let mut prims = Vec::new();
        for c in components {
            match c.shape() {
                Shape::Polyline(v) => {
                    for i in 0..v.len() {
                        prims.push(Prim::Segment {
                            a: v[i],
                            b: v[(i + 1) % v.len()],
                        });
                    }
                }
                Shape::Circle { center, radius } => prims.push(Prim::Circle {
                    center: *center,
                    radius: *radius,
                }),
                Shape::Slit { start, end } => prims.push(Prim::Segment { a: *start, b: *end }),
            }
        }
        let (lo, hi) = bbox;
        let side = (hi.re - lo.re).max(hi.im - lo.im) * 1.1 + 1e-9;
        let lo = (lo + hi) * 0.5 - C64::new(side, side) * 0.5;
        let n = ((prims.len() as f64).sqrt() * 4.0).clamp(16.0, 128.0) as usize;
        let cell = side / n as f64;
        let half_diag = cell * std::f64::consts::FRAC_1_SQRT_2;
        let mut starts = Vec::with_capacity(n * n + 1);
        let mut items = Vec::new();
        let mut states = Vec::with_capacity(n * n);
        let mut dist = vec![0.0; prims.len()];
        for j in 0..n {
            for i in 0..n {
                let c = lo + C64::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);
                let mut best = f64::INFINITY;
                for (k, p) in prims.iter().enumerate() {
                    dist[k] = p.distance(c);
                    best = best.min(dist[k]);
                }
                starts.push(items.len() as u32);
                for (k, &d) in dist.iter().enumerate() {
                    if d <= best + 2.0 * half_diag {
                        items.push(k as u32);
                    }
                }
                states.push(if best > half_diag {
                    if classify(c) {
                        CellState::Inside
                    } else {
                        CellState::Outside
                    }
                } else {
                    CellState::Mixed
                });
            }
        }
        starts.push(items.len() as u32);
        BoundaryIndex {
            prims,
            lo,
            cell,
            n,
            starts,
            items,
            states,
        }
    }

    fn cell_of(&self, z: C64) -> Option<usize> {
        let x = (z.re - self.lo.re) / self.cell;
        let y = (z.im - self.lo.im) / self.cell;
        if x >= 0.0 && y >= 0.0 && x < self.n as f64 && y < self.n as f64 {
            Some(y as usize * self.n + x as usize)
        } else {
            None
        }
    }

    pub(crate) fn state(&self, z: C64) -> CellState {
        self.cell_of(z)
            .map_or(CellState::Outside, |c| self.states[c])
    }

    fn candidates(&self, z: C64) -> Box<dyn Iterator<Item = &Prim> + '_> {
        match self.cell_of(z) {
            Some(c) => Box::new(
                self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
                    .iter()
                    .map(|&k| &self.prims[k as usize]),
            ),
            None => Box::new(self.prims.iter()),
        }
    }

    pub(crate) fn distance(&self, z: C64) -> f64 {
        self.candidates(z)
            .map(|p| p.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn jet(&self, z: C64) -> BoundaryJet {
        let mut best: Option<BoundaryJet> = None;
        for p in self.candidates(z) {
            let j = p.jet(z);
            if best.is_none_or(|b| j.delta < b.delta) {
                best = Some(j);
            }
        }
        best.expect("domain has a boundary")
    }
}
