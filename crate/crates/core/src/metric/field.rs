use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::closed::{ClosedForm, Jet};
use super::grid::{bicubic, Grid};
use crate::conformal::RiemannMap;
use crate::domain::{BoundaryJet, PlanarDomain};
use crate::error::{Error, Result};

/// Version tag of the binary field dump.
pub const FIELD_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"HLMF";

/// Transport fields switch from interpolation to direct map evaluation
/// this many grid spacings from the boundary.
const TRANSPORT_BAND: f64 = 2.9;
/// Interpolation blends from `v` to `u` between `BLEND_START` and twice
/// that many grid spacings from the boundary.
const BLEND_START: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    ConformalTransport,
    LiouvillePde,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::ConformalTransport => "conformal-transport",
            Method::LiouvillePde => "liouville-pde",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Method::ClosedForm),
            "conformal-transport" => Ok(Method::ConformalTransport),
            "liouville-pde" => Ok(Method::LiouvillePde),
            _ => Err(Error::Parse(format!("unknown metric method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Source {
    Closed(ClosedForm),
    Transport(Arc<RiemannMap>),
    Pde,
}

/// Log-density `u = log lambda` sampled on a grid, with the evaluator
/// that produced it.
///
/// Interpolation works on `v = u + log(2 delta)`, which stays bounded up
/// to the boundary; `u` is recovered with the exact boundary distance of
/// the query point.
#[derive(Clone, Debug)]
pub struct MetricField {
    domain: Arc<PlanarDomain>,
    grid: Grid,
    u: Vec<f64>,
    delta: Vec<f64>,
    v: Vec<f64>,
    method: Method,
    residual: Option<f64>,
    source: Source,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    domain_hash: String,
    method: Method,
    residual: Option<f64>,
    grid: Grid,
    closed: Option<ClosedForm>,
}

fn node_deltas(domain: &PlanarDomain, grid: &Grid) -> (Vec<bool>, Vec<f64>) {
    let mut inside = vec![false; grid.len()];
    let mut delta = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let z = grid.node(i, j);
        if domain.inside(z) {
            inside[k] = true;
            delta[k] = domain.boundary_distance(z);
        }
    }
    (inside, delta)
}

fn boundary_term(b: &BoundaryJet) -> Jet {
    // -log(2 delta) with grad delta = n and hess delta = k (I - n n^T).
    let d = b.delta;
    let (nx, ny) = (b.normal.re, b.normal.im);
    let k = b.curvature;
    Jet {
        u: -(2.0 * d).ln(),
        ux: -nx / d,
        uy: -ny / d,
        uxx: -k * (1.0 - nx * nx) / d + nx * nx / (d * d),
        uxy: k * nx * ny / d + nx * ny / (d * d),
        uyy: -k * (1.0 - ny * ny) / d + ny * ny / (d * d),
    }
}

/// Jet of `log|h'| - log(2 Im h)` from `h`, `h'`, `h''`, `h'''`.
fn transport_jet(h: C64, h1: C64, h2: C64, h3: C64) -> Option<Jet> {
    let g = h.im;
    if !(g > 0.0) || h1.norm_sqr() == 0.0 {
        return None;
    }
    let f1 = h2 / h1;
    let f2 = (h3 * h1 - h2 * h2) / (h1 * h1);
    let (gx, gy) = (h1.im, h1.re);
    let (gxx, gxy, gyy) = (h2.im, h2.re, -h2.im);
    Some(Jet {
        u: h1.norm().ln() - (2.0 * g).ln(),
        ux: f1.re - gx / g,
        uy: -f1.im - gy / g,
        uxx: f2.re - gxx / g + gx * gx / (g * g),
        uxy: -f2.im - gxy / g + gx * gy / (g * g),
        uyy: -f2.re - gyy / g + gy * gy / (g * g),
    })
}

impl MetricField {
    pub(crate) fn from_parts(
        domain: Arc<PlanarDomain>,
        grid: Grid,
        u: Vec<f64>,
        delta: Vec<f64>,
        v: Vec<f64>,
        method: Method,
        residual: Option<f64>,
        source: Source,
    ) -> Self {
        MetricField {
            domain,
            grid,
            u,
            delta,
            v,
            method,
            residual,
            source,
        }
    }

    /// Field of a disk or concentric annulus from its closed form.
    pub fn closed_form(domain: Arc<PlanarDomain>, h: f64) -> Result<Self> {
        let form = ClosedForm::detect(&domain)
            .ok_or_else(|| Error::NeedsField(format!("no closed form for `{}`", domain.name())))?;
        let grid = Grid::covering(domain.bounding_box(), h, 3);
        let (inside, delta) = node_deltas(&domain, &grid);
        let u = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                if inside[k] {
                    form.jet(grid.node(i, j)).u
                } else {
                    f64::NAN
                }
            })
            .collect();
        Ok(MetricField {
            domain,
            grid,
            u,
            delta,
            v: Vec::new(),
            method: Method::ClosedForm,
            residual: None,
            source: Source::Closed(form),
        })
    }

    /// Field pulled back from the half-plane through a Riemann map of the domain.
    pub fn transport(domain: Arc<PlanarDomain>, map: Arc<RiemannMap>, h: f64) -> Result<Self> {
        if map.record().domain_hash != domain.spec().hash() {
            return Err(Error::Precondition(
                "Riemann map was computed for another domain".into(),
            ));
        }
        let grid = Grid::covering(domain.bounding_box(), h, 3);
        let (inside, delta) = node_deltas(&domain, &grid);
        let nodes: Vec<usize> = (0..grid.len()).filter(|&k| inside[k]).collect();
        let points: Vec<C64> = nodes
            .iter()
            .map(|&k| {
                let (i, j) = grid.coords(k);
                grid.node(i, j)
            })
            .collect();
        let mut u = vec![f64::NAN; grid.len()];
        let mut v = vec![f64::NAN; grid.len()];
        for (chunk_nodes, chunk) in nodes.chunks(256).zip(points.chunks(256)) {
            for (&k, (w, dw)) in chunk_nodes.iter().zip(map.half_plane_many(chunk)) {
                if w.im > 0.0 {
                    u[k] = dw.norm().ln() - (2.0 * w.im).ln();
                    v[k] = u[k] + (2.0 * delta[k]).ln();
                }
            }
        }
        Ok(MetricField {
            domain,
            grid,
            u,
            delta,
            v,
            method: Method::ConformalTransport,
            residual: None,
            source: Source::Transport(map),
        })
    }

    pub fn domain(&self) -> &Arc<PlanarDomain> {
        &self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Node values of `u`; NaN outside the domain.
    pub fn node_log_density(&self) -> &[f64] {
        &self.u
    }

    /// Node boundary distances; zero outside the domain.
    pub fn node_delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn residual(&self) -> Option<f64> {
        self.residual
    }

    pub fn riemann_map(&self) -> Option<&Arc<RiemannMap>> {
        match &self.source {
            Source::Transport(m) => Some(m),
            _ => None,
        }
    }

    pub fn closed_form_kind(&self) -> Option<ClosedForm> {
        match self.source {
            Source::Closed(c) => Some(c),
            _ => None,
        }
    }

    pub fn density(&self, z: C64) -> Option<f64> {
        self.jet(z).map(|j| j.density())
    }

    pub fn jet(&self, z: C64) -> Option<Jet> {
        self.jets(&[z]).pop().flatten()
    }

    /// Log-density jets at many points; `None` marks points outside the domain.
    pub fn jets(&self, zs: &[C64]) -> Vec<Option<Jet>> {
        let mut out = vec![None; zs.len()];
        let mut exact: Vec<usize> = Vec::new();
        for (k, &z) in zs.iter().enumerate() {
            if !self.domain.inside(z) {
                continue;
            }
            match &self.source {
                Source::Closed(form) => out[k] = Some(form.jet(z)),
                Source::Pde => out[k] = self.interpolated(z, None),
                Source::Transport(_) => {
                    let b = self.domain.boundary_jet(z);
                    if b.delta > TRANSPORT_BAND * self.grid.h {
                        out[k] = self.interpolated(z, Some(b));
                    }
                    if out[k].is_none() {
                        exact.push(k);
                    }
                }
            }
        }
        if let (Source::Transport(map), false) = (&self.source, exact.is_empty()) {
            let pts: Vec<C64> = exact.iter().map(|&k| zs[k]).collect();
            for (&k, j) in exact.iter().zip(map.half_plane_jets(&pts)) {
                out[k] = transport_jet(j[0], j[1], j[2], j[3]);
            }
        }
        out
    }

    fn interpolated(&self, z: C64, b: Option<BoundaryJet>) -> Option<Jet> {
        let b = b.unwrap_or_else(|| self.domain.boundary_jet(z));
        if !(b.delta > 0.0) {
            return None;
        }
        // `u` itself is smooth in the interior, while `v` inherits the kinks
        // of `delta` along the medial axis; blend from `v` near the boundary
        // to `u` away from it.
        let h = self.grid.h;
        let t = ((b.delta - BLEND_START * h) / (BLEND_START * h)).clamp(0.0, 1.0);
        let weight = t * t * (3.0 - 2.0 * t);
        let direct = if weight > 0.0 {
            bicubic(&self.grid, &self.u, z)
        } else {
            None
        };
        let weight = if direct.is_some() { weight } else { 0.0 };
        let near = if weight < 1.0 {
            let v = bicubic(&self.grid, &self.v, z)?;
            let w = boundary_term(&b);
            [
                v[0] + w.u,
                v[1] + w.ux,
                v[2] + w.uy,
                v[3] + w.uxx,
                v[4] + w.uxy,
                v[5] + w.uyy,
            ]
        } else {
            [0.0; 6]
        };
        let far = direct.unwrap_or([0.0; 6]);
        let mix = |k: usize| weight * far[k] + (1.0 - weight) * near[k];
        Some(Jet {
            u: mix(0),
            ux: mix(1),
            uy: mix(2),
            uxx: mix(3),
            uxy: mix(4),
            uyy: mix(5),
        })
    }

    /// Cheap log-density estimate for path resampling: interpolation where
    /// available, otherwise the boundary-layer value `-log(2 delta)`.
    pub fn approx_log_density(&self, z: C64) -> Option<f64> {
        if !self.domain.inside(z) {
            return None;
        }
        if let Source::Closed(form) = self.source {
            return Some(form.jet(z).u);
        }
        let d = self.domain.boundary_distance(z);
        let base = -(2.0 * d).ln();
        if matches!(self.source, Source::Transport(_)) && d <= TRANSPORT_BAND * self.grid.h {
            return Some(base);
        }
        if d >= 2.0 * BLEND_START * self.grid.h {
            if let Some(u) = bicubic(&self.grid, &self.u, z) {
                return Some(u[0]);
            }
        }
        Some(bicubic(&self.grid, &self.v, z).map_or(base, |v| v[0] + base))
    }

    /// Versioned binary dump: magic, format version, JSON header, then the
    /// node arrays as little-endian `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            version: FIELD_FORMAT_VERSION,
            domain_hash: self.domain.spec().hash(),
            method: self.method,
            residual: self.residual,
            grid: self.grid,
            closed: self.closed_form_kind(),
        };
        let head = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(16 + head.len() + 8 * (3 * self.grid.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FIELD_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(head.len() as u64).to_le_bytes());
        out.extend_from_slice(&head);
        for arr in [&self.u, &self.delta, &self.v] {
            out.extend_from_slice(&(arr.len() as u64).to_le_bytes());
            for x in arr.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    /// Inverse of [`Self::to_bytes`]. Transport fields need their map back.
    pub fn from_bytes(
        bytes: &[u8],
        domain: Arc<PlanarDomain>,
        map: Option<Arc<RiemannMap>>,
    ) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("field cache: {m}"));
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated"))?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != FIELD_FORMAT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let hlen = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let header: Header = serde_json::from_slice(take(hlen)?)?;
        if header.domain_hash != domain.spec().hash() {
            return Err(bad("domain hash mismatch"));
        }
        let mut arrays = Vec::new();
        for _ in 0..3 {
            let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
            let raw = take(8 * n)?;
            arrays.push(
                raw.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect::<Vec<_>>(),
            );
        }
        let v = arrays.pop().unwrap();
        let delta = arrays.pop().unwrap();
        let u = arrays.pop().unwrap();
        let source = match header.method {
            Method::ClosedForm => {
                Source::Closed(header.closed.ok_or_else(|| bad("missing closed form"))?)
            }
            Method::ConformalTransport => {
                Source::Transport(map.ok_or_else(|| bad("transport field needs its map"))?)
            }
            Method::LiouvillePde => Source::Pde,
        };
        Ok(MetricField {
            domain,
            grid: header.grid,
            u,
            delta,
            v,
            method: header.method,
            residual: header.residual,
            source,
        })
    }
}
