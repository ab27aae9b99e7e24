//! Riemann maps of simply connected polygonal domains by a geodesic zipper.
//!
//! The boundary samples `z_0, z_1, ..., z_{n-1}` (domain on the left) are
//! first sent to the upper half-plane by `z -> i sqrt((z - z_1) / (z - z_0))`,
//! which opens the edge `[z_0, z_1]` onto the real line and leaves the rest of
//! the boundary as a curve from `0`. Each following sample `c` is then
//! unzipped by the slit map that removes the circular arc from `0` to `c`
//! orthogonal to the real axis:
//!
//! ```text
//! T(z) = z / (1 - a z),   a = Re c / |c|^2,   T(c) = i d,   d = |c|^2 / Im c
//! f(z) = sqrt(T(z)^2 + d^2)
//! ```
//!
//! The last arc, from `0` to the image `e` of `z_0`, is closed by
//! `z -> -(z / (1 - z / e))^2`, and a Möbius map takes the half-plane to the
//! disk with the chosen interior point at the origin and positive derivative.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPoint, PlanarDomain, TraversalSample};
use crate::error::{Error, Result};

/// Map records written by older code are rejected by this version tag.
pub const MAP_FORMAT_VERSION: u32 = 1;

/// Required sup-norm boundary deviation.
pub const MAP_ACCURACY: f64 = 1e-3;

pub const DEFAULT_RESOLUTION: usize = 1024;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// One elementary map of the zipper.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZipStep {
    /// Removes the arc from `0` to a point of the upper half-plane.
    Slit { a: f64, d: f64 },
    /// Moves a sample already on the positive axis (far side of a slit) to `0`.
    Shift { x: f64 },
}

/// Boundary sample and the angle of its image on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub component: usize,
    pub parameter: f64,
    pub point: C64,
    /// Unwrapped angle; increases along the traversal.
    pub angle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Serializable content of a computed map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapRecord {
    pub version: u32,
    pub domain_hash: String,
    pub origin: C64,
    pub resolution: usize,
    pub z0: C64,
    pub z1: C64,
    pub steps: Vec<ZipStep>,
    /// Image of `z_0` on the real axis before the closing map; `None` is infinity.
    pub end: Option<f64>,
    pub w_origin: C64,
    pub rotation: C64,
    pub boundary_table: Vec<BoundaryEntry>,
    pub accuracy: f64,
    pub clamped_steps: usize,
}

/// Conformal map from a simply connected domain onto the unit disk.
#[derive(Clone, Debug)]
pub struct RiemannMap {
    record: MapRecord,
    domain: Arc<PlanarDomain>,
}

#[derive(Clone, Copy, Debug)]
enum Track {
    Upper(C64),
    Real(f64),
    /// At `0`, on the far side of the most recent arc.
    BaseRight,
    Infinity,
}

fn step_forward(step: ZipStep, z: C64, dz: C64) -> (C64, C64) {
    match step {
        ZipStep::Slit { a, d } => {
            let den = ONE - a * z;
            let t = z / den;
            let dt = dz / (den * den);
            let f = t * (ONE + d * d / (t * t)).sqrt();
            (f, t * dt / f)
        }
        ZipStep::Shift { x } => (z - x, dz),
    }
}

fn step_inverse(step: ZipStep, w: C64) -> C64 {
    match step {
        ZipStep::Slit { a, d } => {
            let t = w * (ONE - d * d / (w * w)).sqrt();
            t / (ONE + a * t)
        }
        ZipStep::Shift { x } => w + x,
    }
}

fn step_track(step: ZipStep, x: Track) -> Track {
    let (a, d) = match step {
        ZipStep::Slit { a, d } => (a, d),
        ZipStep::Shift { x: s } => {
            return match x {
                Track::Upper(z) => Track::Upper(z - s),
                Track::Real(r) => Track::Real(r - s),
                Track::BaseRight => Track::Real(-s),
                Track::Infinity => Track::Infinity,
            }
        }
    };
    let t = match x {
        Track::Upper(z) => return Track::Upper(step_forward(step, z, ONE).0),
        Track::BaseRight => return Track::Real(d),
        Track::Real(x) => {
            let den = 1.0 - a * x;
            if den == 0.0 {
                return Track::Infinity;
            }
            x / den
        }
        Track::Infinity => {
            if a == 0.0 {
                return Track::Infinity;
            }
            -1.0 / a
        }
    };
    let mag = (t * t + d * d).sqrt();
    Track::Real(if t > 0.0 { mag } else { -mag })
}

impl RiemannMap {
    /// Compute the map with the default resolution, refining up to 8x until
    /// the boundary deviation is within [`MAP_ACCURACY`].
    pub fn compute(domain: Arc<PlanarDomain>, origin: C64) -> Result<Self> {
        Self::compute_with_resolution(domain, origin, DEFAULT_RESOLUTION)
    }

    pub fn compute_with_resolution(
        domain: Arc<PlanarDomain>,
        origin: C64,
        resolution: usize,
    ) -> Result<Self> {
        if !domain.contains(origin)? {
            return Err(Error::OutsideDomain(origin));
        }
        let mut n = resolution.max(16);
        let mut last = None;
        for _ in 0..4 {
            let map = Self::zip(domain.clone(), origin, n)?;
            if map.record.accuracy <= MAP_ACCURACY {
                return Ok(map);
            }
            last = Some(map.record.accuracy);
            n *= 2;
        }
        Err(Error::Accuracy {
            achieved: last.unwrap_or(f64::NAN),
            required: MAP_ACCURACY,
            detail: format!(
                "zipper on `{}` with up to {} boundary samples",
                domain.name(),
                n / 2
            ),
        })
    }

    /// One zipper pass with about `n` boundary samples and no refinement.
    pub fn zip(domain: Arc<PlanarDomain>, origin: C64, n: usize) -> Result<Self> {
        let mut samples = domain.simply_connected_traversal(n)?;
        rotate_to_safe_start(&mut samples);
        let pts: Vec<C64> = samples.iter().map(|s| s.point).collect();
        let m = pts.len();
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        // Points met twice by the traversal (slit sides, slit anchors): the
        // later visit is the far side of the earlier one.
        let mut twin = vec![None; m];
        for k in 1..m {
            if let Some(j) =
                (0..k).find(|&j| twin[j].is_none() && (pts[j] - pts[k]).norm() <= 1e-12 * scale)
            {
                twin[j] = Some(k);
            }
        }
        let (z0, z1) = (pts[0], pts[1]);

        let mut track: Vec<Track> = Vec::with_capacity(m);
        track.push(Track::Infinity);
        track.push(Track::Real(0.0));
        for &z in &pts[2..] {
            track.push(Track::Upper(I * ((z - z1) / (z - z0)).sqrt()));
        }

        let mut steps = Vec::with_capacity(m.saturating_sub(2));
        let mut clamped = 0;
        for k in 2..m {
            let step = match track[k] {
                Track::Upper(mut c) => {
                    let floor = 1e-12 * c.norm();
                    if c.im <= floor {
                        c.im = floor;
                        clamped += 1;
                    }
                    let nc = c.norm_sqr();
                    if nc == 0.0 {
                        None
                    } else {
                        Some(ZipStep::Slit {
                            a: c.re / nc,
                            d: nc / c.im,
                        })
                    }
                }
                Track::Real(x) if x > 0.0 => Some(ZipStep::Shift { x }),
                Track::BaseRight => None,
                other => {
                    return Err(Error::Geometry(format!(
                        "boundary sample {k} reached the domain side of the axis ({other:?})"
                    )))
                }
            };
            if let Some(step) = step {
                if let ZipStep::Slit { a, d } = step {
                    if !(a.is_finite() && d.is_finite()) {
                        return Err(Error::Geometry(format!(
                            "degenerate zipper step at sample {k}"
                        )));
                    }
                }
                for (j, t) in track.iter_mut().enumerate() {
                    if j != k {
                        *t = step_track(step, *t);
                    }
                }
                steps.push(step);
            }
            track[k] = Track::Real(0.0);
            if let Some(j) = twin[k] {
                track[j] = Track::BaseRight;
            }
        }
        let end = match track[0] {
            Track::Real(x) => Some(x),
            _ => None,
        };

        let mut record = MapRecord {
            version: MAP_FORMAT_VERSION,
            domain_hash: domain.spec().hash(),
            origin,
            resolution: n,
            z0,
            z1,
            steps,
            end,
            w_origin: C64::new(0.0, 1.0),
            rotation: ONE,
            boundary_table: Vec::new(),
            accuracy: f64::INFINITY,
            clamped_steps: clamped,
        };
        let (w_o, dw_o) = half_plane_chain(&record, origin);
        if !(w_o.im > 0.0) {
            return Err(Error::Geometry(format!(
                "interior point {origin} did not map into the upper half-plane"
            )));
        }
        record.w_origin = w_o;
        let deriv = dw_o / (w_o - w_o.conj());
        record.rotation = deriv.conj() / deriv.norm();

        let mut table = Vec::with_capacity(m);
        let mut prev: Option<f64> = None;
        for (s, t) in samples.iter().zip(&track) {
            let w = match *t {
                _ if std::ptr::eq(s, &samples[0]) => None,
                Track::Real(x) => Some(close_real(&record, x)),
                Track::Infinity => None,
                Track::Upper(_) | Track::BaseRight => unreachable!("every sample is unzipped"),
            };
            let disk = match w {
                Some(x) => {
                    record.rotation * (C64::new(x, 0.0) - w_o) / (C64::new(x, 0.0) - w_o.conj())
                }
                None => record.rotation,
            };
            let mut angle = disk.arg();
            if let Some(p) = prev {
                while angle < p - PI {
                    angle += 2.0 * PI;
                }
                while angle > p + PI {
                    angle -= 2.0 * PI;
                }
            }
            prev = Some(angle);
            table.push(BoundaryEntry {
                component: s.component,
                parameter: s.parameter,
                point: s.point,
                angle,
            });
        }
        record.boundary_table = table;

        let mut map = RiemannMap { record, domain };
        map.record.accuracy = map.boundary_deviation(&samples);
        Ok(map)
    }

    /// Sup over edge midpoints (nudged into the domain) of `||phi| - 1|`.
    fn boundary_deviation(&self, samples: &[TraversalSample]) -> f64 {
        let m = samples.len();
        (0..m)
            .map(|i| {
                let a = samples[i].point;
                let b = samples[(i + 1) % m].point;
                let edge = b - a;
                let len = edge.norm();
                if len == 0.0 {
                    return 0.0;
                }
                let mid = (a + b) * 0.5 + edge * I * (1e-9 / len) * len.min(1.0);
                let w = self.forward_unchecked(mid);
                (w.norm() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn from_record(record: MapRecord, domain: Arc<PlanarDomain>) -> Result<Self> {
        if record.version != MAP_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported map record version {}",
                record.version
            )));
        }
        if record.domain_hash != domain.spec().hash() {
            return Err(Error::Parse(
                "map record was computed for a different domain".into(),
            ));
        }
        Ok(RiemannMap { record, domain })
    }

    pub fn record(&self) -> &MapRecord {
        &self.record
    }

    pub fn domain(&self) -> &Arc<PlanarDomain> {
        &self.domain
    }

    pub fn origin(&self) -> C64 {
        self.record.origin
    }

    pub fn accuracy(&self) -> f64 {
        self.record.accuracy
    }

    pub fn boundary_table(&self) -> &[BoundaryEntry] {
        &self.record.boundary_table
    }

    /// Image in the upper half-plane and its derivative.
    pub fn half_plane(&self, z: C64) -> (C64, C64) {
        half_plane_chain(&self.record, z)
    }

    /// [`Self::half_plane`] for many points.
    pub fn half_plane_many(&self, zs: &[C64]) -> Vec<(C64, C64)> {
        let mut w = vec![C64::new(0.0, 0.0); zs.len()];
        let mut dw = w.clone();
        half_plane_batch(&self.record, zs, &mut w, &mut dw);
        w.into_iter().zip(dw).collect()
    }

    /// Half-plane image `h(z)` with its first three derivatives, for many points.
    pub fn half_plane_jets(&self, zs: &[C64]) -> Vec<[C64; 4]> {
        half_plane_jet_batch(&self.record, zs)
    }

    pub fn forward_unchecked(&self, z: C64) -> C64 {
        let (w, _) = half_plane_chain(&self.record, z);
        self.from_half_plane(w)
    }

    /// `phi(z)` and `phi'(z)`.
    pub fn forward_with_derivative(&self, z: C64) -> (C64, C64) {
        let (w, dw) = half_plane_chain(&self.record, z);
        let wo = self.record.w_origin;
        let den = w - wo.conj();
        let phi = self.record.rotation * (w - wo) / den;
        let dphi = self.record.rotation * (wo - wo.conj()) / (den * den) * dw;
        (phi, dphi)
    }

    fn from_half_plane(&self, w: C64) -> C64 {
        let wo = self.record.w_origin;
        self.record.rotation * (w - wo) / (w - wo.conj())
    }

    pub fn forward(&self, z: C64) -> Result<C64> {
        if !self.domain.contains(z)? {
            return Err(Error::OutsideDomain(z));
        }
        Ok(self.forward_unchecked(z))
    }

    pub fn inverse(&self, w: C64) -> Result<C64> {
        if !(w.norm() < 1.0) {
            return Err(Error::Domain(format!("{w} is not in the open unit disk")));
        }
        Ok(self.inverse_unchecked(w))
    }

    pub fn inverse_unchecked(&self, w: C64) -> C64 {
        let r = &self.record;
        let omega = w / r.rotation;
        let wo = r.w_origin;
        let mut z = (wo - omega * wo.conj()) / (ONE - omega);
        let g = -(-z).sqrt();
        z = match r.end {
            Some(e) => g / (ONE + g / e),
            None => g,
        };
        for step in r.steps.iter().rev() {
            z = step_inverse(*step, z);
        }
        let s = -I * z;
        let a = s * s;
        (a * r.z0 - r.z1) / (a - ONE)
    }

    pub fn eval(&self, z: C64, direction: Direction) -> Result<C64> {
        match direction {
            Direction::Forward => self.forward(z),
            Direction::Inverse => self.inverse(z),
        }
    }

    /// Log of the transported hyperbolic density `|phi'| / (1 - |phi|^2)`,
    /// evaluated through the half-plane to avoid cancellation near the boundary.
    pub fn log_density(&self, z: C64) -> f64 {
        let (w, dw) = half_plane_chain(&self.record, z);
        dw.norm().ln() - (2.0 * w.im).ln()
    }

    /// Circle angle(s) corresponding to a boundary point. Points on a slit
    /// without a side hint have two angles, one per side.
    pub fn boundary_correspondence(&self, p: &BoundaryPoint) -> Result<Vec<f64>> {
        let comps = self.domain.components();
        let comp = comps
            .get(p.component)
            .ok_or_else(|| Error::Domain(format!("no boundary component {}", p.component)))?;
        if !self
            .record
            .boundary_table
            .iter()
            .any(|e| e.component == p.component)
        {
            return Err(Error::Domain(format!(
                "component {} is not part of this map's boundary",
                p.component
            )));
        }
        if (comp.point_at(p.parameter) - p.coordinate).norm() > 1e-9 {
            return Err(Error::Domain(
                "boundary point coordinate does not match its parameter".into(),
            ));
        }
        let params = if comp.is_degenerate() && p.side_hint.is_none() {
            vec![p.parameter, 1.0 - p.parameter]
        } else {
            vec![p.parameter]
        };
        params
            .into_iter()
            .map(|t| self.interpolate_angle(p.component, t))
            .collect()
    }

    fn interpolate_angle(&self, component: usize, t: f64) -> Result<f64> {
        let table = &self.record.boundary_table;
        let m = table.len();
        let t = t.rem_euclid(1.0);
        // Entries whose sample interval along the traversal brackets `t`.
        for i in 0..m {
            let a = &table[i];
            let b = &table[(i + 1) % m];
            if a.component != component || b.component != component {
                continue;
            }
            let mut tb = b.parameter;
            let ta = a.parameter;
            if tb < ta && ta - tb > 0.5 {
                tb += 1.0;
            }
            let mut tt = t;
            if tt < ta && tb > 1.0 {
                tt += 1.0;
            }
            if tt >= ta && tt <= tb && tb > ta {
                let mut angle_b = b.angle;
                if i + 1 == m {
                    angle_b += 2.0 * PI;
                }
                let f = (tt - ta) / (tb - ta);
                return Ok(a.angle + f * (angle_b - a.angle));
            }
            if (t - ta).abs() < 1e-12 {
                return Ok(a.angle);
            }
        }
        // Exact match on an entry at a component junction.
        table
            .iter()
            .find(|e| e.component == component && (e.parameter - t).abs() < 1e-9)
            .map(|e| e.angle)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "parameter {t} not covered on component {component}"
                ))
            })
    }
}

fn close_real(record: &MapRecord, x: f64) -> f64 {
    let g = match record.end {
        Some(e) => x / (1.0 - x / e),
        None => x,
    };
    -g * g
}

fn half_plane_chain(record: &MapRecord, z: C64) -> (C64, C64) {
    let mut w = [C64::new(0.0, 0.0)];
    let mut dw = [C64::new(0.0, 0.0)];
    half_plane_batch(record, &[z], &mut w, &mut dw);
    (w[0], dw[0])
}

/// Chain evaluation for many points at once; the inner loop runs over the
/// points so independent evaluations overlap in the pipeline.
fn half_plane_batch(record: &MapRecord, zs: &[C64], w: &mut [C64], dw: &mut [C64]) {
    let (z0, z1) = (record.z0, record.z1);
    for ((z, w), dw) in zs.iter().zip(w.iter_mut()).zip(dw.iter_mut()) {
        let a = (z - z1) / (z - z0);
        let da = (z1 - z0) / ((z - z0) * (z - z0));
        let s = fast_sqrt(a);
        *w = I * s;
        *dw = I * da / (2.0 * s);
    }
    for step in &record.steps {
        match *step {
            ZipStep::Slit { a, d } => {
                for (w, dw) in w.iter_mut().zip(dw.iter_mut()) {
                    let den = ONE - a * *w;
                    let inv = den.conj() / den.norm_sqr();
                    // `Im t = Im w / |den|^2` exactly; the product loses it near the axis.
                    let t = C64::new((*w * inv).re, w.im / den.norm_sqr());
                    let dt = *dw * inv * inv;
                    let mut f = fast_sqrt(t * t + d * d);
                    // The branch in the upper half-plane; on the axis, the one
                    // on the same side as `t`.
                    if f.im < 0.0 || (f.im.abs() <= 1e-14 * f.re.abs() && f.re * t.re < 0.0) {
                        f = -f;
                    }
                    *dw = t * dt / f;
                    *w = f;
                }
            }
            ZipStep::Shift { x } => {
                for w in w.iter_mut() {
                    *w -= x;
                }
            }
        }
    }
    for (w, dw) in w.iter_mut().zip(dw.iter_mut()) {
        let (g, dg) = match record.end {
            Some(e) => {
                let den = ONE - *w / e;
                let g = *w / den;
                (C64::new(g.re, w.im / den.norm_sqr()), *dw / (den * den))
            }
            None => (*w, *dw),
        };
        *w = C64::new(g.im * g.im - g.re * g.re, -2.0 * g.re * g.im);
        *dw = -2.0 * g * dg;
    }
}

/// Compose a jet `[w, w', w'', w''']` with `F`, given `F(w)` and its first
/// three derivatives.
fn chain(j: &mut [C64; 4], f: C64, f1: C64, f2: C64, f3: C64) {
    let (d1, d2, d3) = (j[1], j[2], j[3]);
    j[0] = f;
    j[1] = f1 * d1;
    j[2] = f2 * d1 * d1 + f1 * d2;
    j[3] = f3 * d1 * d1 * d1 + 3.0 * f2 * d1 * d2 + f1 * d3;
}

/// Half-plane image with its first three derivatives, for many points.
fn half_plane_jet_batch(record: &MapRecord, zs: &[C64]) -> Vec<[C64; 4]> {
    let (z0, z1) = (record.z0, record.z1);
    let mut out: Vec<[C64; 4]> = zs
        .iter()
        .map(|&z| {
            let q = z - z0;
            let c = z1 - z0;
            let mut j = [
                ONE - c / q,
                c / (q * q),
                -2.0 * c / (q * q * q),
                6.0 * c / (q * q * q * q),
            ];
            let s = fast_sqrt(j[0]);
            let (s1, s2, s3) = (0.5 / s, -0.25 / (s * j[0]), 0.375 / (s * j[0] * j[0]));
            chain(&mut j, s, s1, s2, s3);
            for v in j.iter_mut() {
                *v *= I;
            }
            j
        })
        .collect();
    for step in &record.steps {
        match *step {
            ZipStep::Slit { a, d } => {
                for j in out.iter_mut() {
                    let w = j[0];
                    let den = ONE - a * w;
                    let n2 = den.norm_sqr();
                    let inv = den.conj() / n2;
                    let t = C64::new((w * inv).re, w.im / n2);
                    let (i2, i3) = (inv * inv, inv * inv * inv);
                    chain(j, t, i2, 2.0 * a * i3, 6.0 * a * a * i3 * inv);
                    let mut f = fast_sqrt(t * t + d * d);
                    if f.im < 0.0 || (f.im.abs() <= 1e-14 * f.re.abs() && f.re * t.re < 0.0) {
                        f = -f;
                    }
                    let f3 = f * f * f;
                    chain(j, f, t / f, d * d / f3, -3.0 * d * d * t / (f3 * f * f));
                }
            }
            ZipStep::Shift { x } => {
                for j in out.iter_mut() {
                    j[0] -= x;
                }
            }
        }
    }
    for j in out.iter_mut() {
        if let Some(e) = record.end {
            let w = j[0];
            let den = ONE - w / e;
            let g = w / den;
            let inv = ONE / den;
            let (i2, i3) = (inv * inv, inv * inv * inv);
            chain(
                j,
                C64::new(g.re, w.im / den.norm_sqr()),
                i2,
                2.0 / e * i3,
                6.0 / (e * e) * i3 * inv,
            );
        }
        let g = j[0];
        let zero = C64::new(0.0, 0.0);
        chain(
            j,
            C64::new(g.im * g.im - g.re * g.re, -2.0 * g.re * g.im),
            -2.0 * g,
            -2.0 * ONE,
            zero,
        );
    }
    out
}

/// Principal square root without the polar round trip.
fn fast_sqrt(z: C64) -> C64 {
    let r = (z.re * z.re + z.im * z.im).sqrt();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if z.re >= 0.0 {
        let re = (0.5 * (r + z.re)).sqrt();
        C64::new(re, z.im / (2.0 * re))
    } else {
        let im = (0.5 * (r - z.re)).sqrt().copysign(z.im);
        C64::new(z.im / (2.0 * im), im)
    }
}

/// Rotate the traversal so the first edge lies on a component that no other
/// sample touches (its image must be the only boundary on the cut).
fn rotate_to_safe_start(samples: &mut [TraversalSample]) {
    let others: Vec<C64> = samples
        .iter()
        .filter(|s| s.component != 0)
        .map(|s| s.point)
        .collect();
    if others.is_empty() {
        return;
    }
    let m = samples.len();
    let score = |i: usize| -> f64 {
        if samples[i].component != 0 || samples[(i + 1) % m].component != 0 {
            return -1.0;
        }
        let mid = (samples[i].point + samples[(i + 1) % m].point) * 0.5;
        others
            .iter()
            .map(|p| (p - mid).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let best = (0..m)
        .max_by(|&a, &b| score(a).partial_cmp(&score(b)).unwrap())
        .unwrap_or(0);
    samples.rotate_left(best);
}
