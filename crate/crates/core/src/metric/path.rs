//! Intrinsic distances: Dijkstra on a lattice graph for a feasible path,
//! then energy refinement of that path.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::MetricField;
use super::refine::{refine, RefineOptions};
use crate::domain::{BoundaryPoint, PlanarDomain};
use crate::error::{Error, Result};

/// Absolute slack allowed between a refined length and the true distance.
pub const OPTIMIZATION_TOLERANCE: f64 = 1e-3;

/// Target graph spacing as a fraction of the domain's bounding-box side.
const GRAPH_RESOLUTION: f64 = 128.0;

const MEMO_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Segment,
    Ray,
}

/// Polyline path with an intrinsic-length parametrisation.
///
/// `parameter_table[i]` is the parameter at `vertices[i]`; parameters grow
/// by `1 / speed` per unit of intrinsic length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub vertices: Vec<C64>,
    pub kind: PathKind,
    pub length: f64,
    pub landing: Option<BoundaryPoint>,
    pub parameter_table: Vec<f64>,
    /// Density at the start, middle and end of each chord.
    pub segment_density: Vec<[f64; 3]>,
    pub speed: f64,
}

/// Density at chord fraction `f`, quadratic through the three samples.
fn quadratic(d: &[f64; 3], f: f64) -> f64 {
    let [a, m, b] = *d;
    a + (-3.0 * a + 4.0 * m - b) * f + (2.0 * a - 4.0 * m + 2.0 * b) * f * f
}

/// Integral of [`quadratic`] over `[0, f]`, in units of the chord length.
fn partial(d: &[f64; 3], f: f64) -> f64 {
    let [a, m, b] = *d;
    let c1 = -3.0 * a + 4.0 * m - b;
    let c2 = 2.0 * a - 4.0 * m + 2.0 * b;
    a * f + c1 * f * f / 2.0 + c2 * f * f * f / 3.0
}

impl GeodesicPath {
    pub(crate) fn from_parts(
        vertices: Vec<C64>,
        densities: Vec<[f64; 3]>,
        lengths: &[f64],
        kind: PathKind,
    ) -> Self {
        let mut table = Vec::with_capacity(vertices.len());
        let mut t = 0.0;
        table.push(0.0);
        for l in lengths {
            t += l;
            table.push(t);
        }
        GeodesicPath {
            vertices,
            kind,
            length: t,
            landing: None,
            parameter_table: table,
            segment_density: densities,
            speed: 1.0,
        }
    }

    fn trivial(z: C64) -> Self {
        GeodesicPath {
            vertices: vec![z, z],
            kind: PathKind::Segment,
            length: 0.0,
            landing: None,
            parameter_table: vec![0.0, 0.0],
            segment_density: vec![[0.0; 3]],
            speed: 1.0,
        }
    }

    pub fn start(&self) -> C64 {
        self.vertices[0]
    }

    pub fn end(&self) -> C64 {
        *self.vertices.last().unwrap()
    }

    /// Largest parameter value.
    pub fn parameter_length(&self) -> f64 {
        *self.parameter_table.last().unwrap()
    }

    /// Chord index and chord fraction at parameter `t`.
    fn locate(&self, t: f64) -> (usize, f64) {
        let table = &self.parameter_table;
        let t = t.clamp(0.0, self.parameter_length());
        let i = match table.partition_point(|&x| x <= t) {
            0 => 0,
            k => (k - 1).min(table.len() - 2),
        };
        let span = table[i + 1] - table[i];
        if span <= 0.0 {
            return (i, 0.0);
        }
        let d = &self.segment_density[i];
        let total = partial(d, 1.0);
        let target = (t - table[i]) / span * total;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut f = (t - table[i]) / span;
        for _ in 0..60 {
            let g = partial(d, f) - target;
            if g.abs() <= 1e-15 * total || hi - lo < 1e-15 {
                break;
            }
            if g > 0.0 {
                hi = f;
            } else {
                lo = f;
            }
            let slope = quadratic(d, f);
            let next = f - g / slope;
            f = if slope > 0.0 && next >= lo && next <= hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        (i, f)
    }

    /// Point at parameter `t`, clamped to the parameter range.
    pub fn point_at(&self, t: f64) -> C64 {
        let (i, f) = self.locate(t);
        self.vertices[i] + (self.vertices[i + 1] - self.vertices[i]) * f
    }

    pub fn reversed(&self) -> Self {
        let total = self.parameter_length();
        GeodesicPath {
            vertices: self.vertices.iter().rev().copied().collect(),
            kind: self.kind,
            length: self.length,
            landing: None,
            parameter_table: self
                .parameter_table
                .iter()
                .rev()
                .map(|t| total - t)
                .collect(),
            segment_density: self
                .segment_density
                .iter()
                .rev()
                .map(|d| [d[2], d[1], d[0]])
                .collect(),
            speed: self.speed,
        }
    }

    /// Initial portion up to parameter `t`.
    pub fn truncated(&self, t: f64) -> Self {
        let t = t.clamp(0.0, self.parameter_length());
        let (i, f) = self.locate(t);
        let mut vertices = self.vertices[..=i].to_vec();
        let mut table = self.parameter_table[..=i].to_vec();
        let mut dens = self.segment_density[..i].to_vec();
        let d = self.segment_density[i];
        vertices.push(self.point_at(t));
        table.push(t);
        dens.push([d[0], quadratic(&d, 0.5 * f), quadratic(&d, f)]);
        GeodesicPath {
            vertices,
            kind: self.kind,
            length: t * self.speed,
            landing: self.landing,
            parameter_table: table,
            segment_density: dens,
            speed: self.speed,
        }
    }

    /// Same trace traversed at `speed` units of intrinsic length per unit parameter.
    pub fn with_speed(&self, speed: f64) -> Self {
        let mut p = self.clone();
        p.parameter_table = self
            .parameter_table
            .iter()
            .map(|t| t * self.speed / speed)
            .collect();
        p.speed = speed;
        p
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Coarse lattice graph over the field grid with 16-neighbour edges.
struct Graph {
    /// Every `step`-th field node in each direction.
    step: usize,
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: C64,
    /// Coarse cell -> node id, `u32::MAX` when absent.
    ids: Vec<u32>,
    points: Vec<C64>,
    density: Vec<f64>,
    starts: Vec<u32>,
    targets: Vec<u32>,
    weights: Vec<f32>,
}

const OFFSETS: [(isize, isize); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (1, -2),
    (2, -1),
    (-1, -2),
    (-2, -1),
];

impl Graph {
    fn build(field: &MetricField, step: usize) -> Self {
        let domain = field.domain();
        let grid = field.grid();
        let (nx, ny) = (grid.nx.div_ceil(step), grid.ny.div_ceil(step));
        let spacing = grid.h * step as f64;
        let u = field.node_log_density();
        let delta = field.node_delta();
        let mut ids = vec![u32::MAX; nx * ny];
        let mut points = Vec::new();
        let mut density = Vec::new();
        let mut node_delta = Vec::new();
        for cj in 0..ny {
            for ci in 0..nx {
                let k = grid.index(ci * step, cj * step);
                if u[k].is_finite() && delta[k] >= 0.25 * spacing {
                    ids[cj * nx + ci] = points.len() as u32;
                    points.push(grid.node(ci * step, cj * step));
                    density.push(u[k].exp());
                    node_delta.push(delta[k]);
                }
            }
        }
        let mut starts = Vec::with_capacity(points.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        for cj in 0..ny {
            for ci in 0..nx {
                let a = ids[cj * nx + ci];
                if a == u32::MAX {
                    continue;
                }
                starts.push(targets.len() as u32);
                let a = a as usize;
                for (di, dj) in OFFSETS {
                    let (bi, bj) = (ci as isize + di, cj as isize + dj);
                    if bi < 0 || bj < 0 || bi as usize >= nx || bj as usize >= ny {
                        continue;
                    }
                    let b = ids[bj as usize * nx + bi as usize];
                    if b == u32::MAX {
                        continue;
                    }
                    let bu = b as usize;
                    let len = spacing * ((di * di + dj * dj) as f64).sqrt();
                    if len > node_delta[a].min(node_delta[bu])
                        && domain.segment_hits_boundary(points[a], points[bu])
                    {
                        continue;
                    }
                    targets.push(b);
                    weights.push((len * 0.5 * (density[a] + density[bu])) as f32);
                }
            }
        }
        starts.push(targets.len() as u32);
        Graph {
            step,
            nx,
            ny,
            spacing,
            origin: grid.origin,
            ids,
            points,
            density,
            starts,
            targets,
            weights,
        }
    }

    /// Graph nodes visible from `z` within a growing radius, with the
    /// trapezoidal weight of the connecting segment.
    fn attach(&self, domain: &PlanarDomain, z: C64, lambda: f64) -> Vec<(u32, f64)> {
        let mut radius = 2.5 * self.spacing;
        let delta = domain.boundary_distance(z);
        for _ in 0..6 {
            let r = (radius / self.spacing).ceil() as isize;
            let ci = ((z.re - self.origin.re) / self.spacing).round() as isize;
            let cj = ((z.im - self.origin.im) / self.spacing).round() as isize;
            let mut out = Vec::new();
            for dj in -r..=r {
                for di in -r..=r {
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                        continue;
                    }
                    let id = self.ids[j as usize * self.nx + i as usize];
                    if id == u32::MAX {
                        continue;
                    }
                    let p = self.points[id as usize];
                    let len = (p - z).norm();
                    if len > radius || (len > delta && domain.segment_hits_boundary(z, p)) {
                        continue;
                    }
                    out.push((id, len * 0.5 * (lambda + self.density[id as usize])));
                }
            }
            if !out.is_empty() {
                return out;
            }
            radius *= 2.0;
        }
        Vec::new()
    }

    /// Cheapest route between the attachment sets; returns its cost and node sequence.
    fn shortest(&self, from: &[(u32, f64)], to: &[(u32, f64)]) -> Option<(f64, Vec<u32>)> {
        let n = self.points.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![u32::MAX; n];
        let mut exit: HashMap<u32, f64> = HashMap::with_capacity(to.len());
        for &(id, w) in to {
            let e = exit.entry(id).or_insert(f64::INFINITY);
            *e = e.min(w);
        }
        let mut heap = BinaryHeap::new();
        for &(id, w) in from {
            if w < dist[id as usize] {
                dist[id as usize] = w;
                heap.push(Entry { cost: w, node: id });
            }
        }
        let mut best = f64::INFINITY;
        let mut best_node = u32::MAX;
        while let Some(Entry { cost, node }) = heap.pop() {
            if cost >= best {
                break;
            }
            let a = node as usize;
            if cost > dist[a] {
                continue;
            }
            if let Some(&w) = exit.get(&node) {
                if cost + w < best {
                    best = cost + w;
                    best_node = node;
                }
            }
            for e in self.starts[a] as usize..self.starts[a + 1] as usize {
                let b = self.targets[e] as usize;
                let c = cost + self.weights[e] as f64;
                if c < dist[b] {
                    dist[b] = c;
                    prev[b] = node;
                    heap.push(Entry {
                        cost: c,
                        node: b as u32,
                    });
                }
            }
        }
        if best_node == u32::MAX {
            return None;
        }
        let mut seq = vec![best_node];
        let mut cur = best_node;
        while prev[cur as usize] != u32::MAX {
            cur = prev[cur as usize];
            seq.push(cur);
        }
        seq.reverse();
        Some((best, seq))
    }
}

/// Intrinsic distances and geodesics over a fixed metric field.
///
/// Results are memoised; a query and its reverse share one computation, so
/// `distance(z, w) == distance(w, z)` exactly.
pub struct MetricEngine {
    field: Arc<MetricField>,
    graph: Graph,
    options: RefineOptions,
    memo: Mutex<HashMap<[u64; 4], Arc<GeodesicPath>>>,
}

impl std::fmt::Debug for MetricEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricEngine")
            .field("domain", &self.field.domain().name())
            .field("method", &self.field.method())
            .field("h", &self.field.grid().h)
            .field("graph_step", &self.graph.step)
            .finish()
    }
}

fn key(z: C64, w: C64) -> [u64; 4] {
    [
        z.re.to_bits(),
        z.im.to_bits(),
        w.re.to_bits(),
        w.im.to_bits(),
    ]
}

impl MetricEngine {
    pub fn new(field: Arc<MetricField>) -> Self {
        Self::with_options(field, RefineOptions::default())
    }

    pub fn with_options(field: Arc<MetricField>, options: RefineOptions) -> Self {
        let (lo, hi) = field.domain().bounding_box();
        let side = (hi.re - lo.re).max(hi.im - lo.im);
        let step = ((side / GRAPH_RESOLUTION) / field.grid().h)
            .floor()
            .max(1.0) as usize;
        let graph = Graph::build(&field, step);
        MetricEngine {
            field,
            graph,
            options,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &Arc<MetricField> {
        &self.field
    }

    pub fn domain(&self) -> &Arc<PlanarDomain> {
        self.field.domain()
    }

    pub fn options(&self) -> &RefineOptions {
        &self.options
    }

    pub fn density(&self, z: C64) -> Result<f64> {
        self.field.density(z).ok_or(Error::OutsideDomain(z))
    }

    pub fn distance(&self, z: C64, w: C64) -> Result<f64> {
        Ok(self.geodesic(z, w)?.length)
    }

    /// Geodesic segment from `z` to `w`, unit speed.
    pub fn geodesic(&self, z: C64, w: C64) -> Result<Arc<GeodesicPath>> {
        self.geodesic_seeded(z, w, None)
    }

    /// As [`geodesic`](Self::geodesic), starting the refinement from `initial`
    /// (a polyline from `z` to `w`) instead of a graph route.
    pub(crate) fn geodesic_seeded(
        &self,
        z: C64,
        w: C64,
        initial: Option<Vec<C64>>,
    ) -> Result<Arc<GeodesicPath>> {
        let domain = self.domain();
        for p in [z, w] {
            if !domain.contains(p)? {
                return Err(Error::OutsideDomain(p));
            }
        }
        if z == w {
            return Ok(Arc::new(GeodesicPath::trivial(z)));
        }
        let flip = key(z, w) > key(w, z);
        let (a, b) = if flip { (w, z) } else { (z, w) };
        let k = key(a, b);
        let cached = self.memo.lock().unwrap().get(&k).cloned();
        let path = match cached {
            Some(p) => p,
            None => {
                let initial = initial.map(|mut p| {
                    if flip {
                        p.reverse();
                    }
                    p
                });
                let p = Arc::new(self.compute(a, b, initial)?);
                let mut memo = self.memo.lock().unwrap();
                if memo.len() >= MEMO_LIMIT {
                    memo.clear();
                }
                memo.insert(k, p.clone());
                p
            }
        };
        Ok(if flip {
            Arc::new(path.reversed())
        } else {
            path
        })
    }

    /// Distances from `z` to each target.
    pub fn distances_from(&self, z: C64, targets: &[C64]) -> Result<Vec<f64>> {
        targets.iter().map(|&w| self.distance(z, w)).collect()
    }

    fn initial_path(&self, z: C64, w: C64) -> Result<Vec<C64>> {
        let domain = self.domain();
        let lz = self
            .field
            .approx_log_density(z)
            .ok_or(Error::OutsideDomain(z))?
            .exp();
        let lw = self
            .field
            .approx_log_density(w)
            .ok_or(Error::OutsideDomain(w))?
            .exp();
        let from = self.graph.attach(domain, z, lz);
        let to = self.graph.attach(domain, w, lw);
        let routed = if from.is_empty() || to.is_empty() {
            None
        } else {
            self.graph.shortest(&from, &to)
        };
        let budget = routed.as_ref().map_or(f64::INFINITY, |r| r.0);
        if !domain.segment_hits_boundary(z, w) && self.chord_estimate(z, w, budget).is_some() {
            return Ok(vec![z, w]);
        }
        match routed {
            Some((_, seq)) => {
                let mut poly = Vec::with_capacity(seq.len() + 2);
                poly.push(z);
                poly.extend(seq.iter().map(|&id| self.graph.points[id as usize]));
                poly.push(w);
                Ok(poly)
            }
            None => Err(Error::Connectivity(format!(
                "{z} and {w} lie in different components of the grid graph"
            ))),
        }
    }

    /// Length of the straight chord by adaptive trapezoidal marching, or
    /// `None` once it exceeds `budget`.
    fn chord_estimate(&self, z: C64, w: C64, budget: f64) -> Option<f64> {
        let len = (w - z).norm();
        let mut s = 0.0;
        let mut total = 0.0;
        let mut lam = self.field.approx_log_density(z)?.exp();
        for _ in 0..100_000 {
            if s >= len {
                return Some(total);
            }
            let ds = (0.02 / lam).min(len - s);
            let next = if s + ds >= len {
                w
            } else {
                z + (w - z) * ((s + ds) / len)
            };
            let l2 = self.field.approx_log_density(next)?.exp();
            total += 0.5 * ds * (lam + l2);
            if total > budget {
                return None;
            }
            lam = l2;
            s += ds;
        }
        None
    }

    fn compute(&self, z: C64, w: C64, initial: Option<Vec<C64>>) -> Result<GeodesicPath> {
        let poly = match initial {
            Some(p) => p,
            None => self.initial_path(z, w)?,
        };
        let r = refine(&self.field, &poly, &self.options)?;
        Ok(GeodesicPath::from_parts(
            r.vertices,
            r.densities,
            &r.lengths,
            PathKind::Segment,
        ))
    }

    /// Path along the given polyline (not optimised), split into chords of
    /// intrinsic length about the configured segment length.
    pub fn path_through(&self, vertices: &[C64]) -> Result<GeodesicPath> {
        if vertices.len() < 2 {
            return Err(Error::Precondition(
                "a path needs at least two vertices".into(),
            ));
        }
        let domain = self.domain();
        let mut pts = vec![vertices[0]];
        for win in vertices.windows(2) {
            let (a, b) = (win[0], win[1]);
            if domain.segment_hits_boundary(a, b) {
                return Err(Error::Geometry(format!(
                    "polyline edge {a} -> {b} crosses the boundary"
                )));
            }
            let est = self.chord_estimate(a, b, f64::INFINITY).ok_or_else(|| {
                Error::Geometry(format!("cannot estimate the length of {a} -> {b}"))
            })?;
            let pieces = (est / self.options.segment_length).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                pts.push(a + (b - a) * (k as f64 / pieces as f64));
            }
        }
        let mut mids = Vec::with_capacity(2 * pts.len());
        mids.extend_from_slice(&pts);
        mids.extend(pts.windows(2).map(|w| (w[0] + w[1]) * 0.5));
        let jets = self.field.jets(&mids);
        let n = pts.len();
        let lam = |k: usize| {
            jets[k]
                .map(|j| j.density())
                .ok_or(Error::OutsideDomain(mids[k]))
        };
        let mut dens = Vec::with_capacity(n - 1);
        let mut lengths = Vec::with_capacity(n - 1);
        for s in 0..n - 1 {
            let d = [lam(s)?, lam(n + s)?, lam(s + 1)?];
            lengths.push((pts[s + 1] - pts[s]).norm() * (d[0] + 4.0 * d[1] + d[2]) / 6.0);
            dens.push(d);
        }
        Ok(GeodesicPath::from_parts(
            pts,
            dens,
            &lengths,
            PathKind::Segment,
        ))
    }

    pub fn cached_queries(&self) -> usize {
        self.memo.lock().unwrap().len()
    }
}
