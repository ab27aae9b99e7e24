//! Bounded planar domains bounded by Jordan curves and slits.
//!
//! A [`PlanarDomain`] is built from a [`DomainSpec`] and must be validated
//! before it answers membership queries. The outer component is traversed
//! counterclockwise and inner components clockwise, so the domain is always
//! on the left of every traversal. Slits are stored as doubly traversed arcs
//! whose two passes give the two accessible sides.

mod component;
pub mod geometry;
mod index;
mod spec;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use component::{BoundaryComponent, Role, Shape};
pub use index::BoundaryJet;
pub use spec::{ComponentSpec, DomainSpec, Orientation};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use geometry::segment_distance;
use index::{BoundaryIndex, CellState};

/// Vertex tolerance in domain coordinates.
pub const VERTEX_TOL: f64 = 1e-12;

/// Number of vertices used when a circle must be treated as a polyline.
const CIRCLE_OUTLINE: usize = 1024;

#[derive(Clone, Debug)]
pub struct PlanarDomain {
    name: String,
    components: Vec<BoundaryComponent>,
    base_point: C64,
    bbox: (C64, C64),
    spec: DomainSpec,
    validated: bool,
    index: OnceLock<BoundaryIndex>,
}

/// A point on the boundary, addressed by component and traversal parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub component: usize,
    pub parameter: f64,
    pub coordinate: C64,
    /// Inward approach direction; required on slits, where a point has two sides.
    pub side_hint: Option<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproachRule {
    RadialDyadic,
    Custom,
}

/// Interior points converging to a boundary point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproachSequence {
    pub target: BoundaryPoint,
    pub points: Vec<C64>,
    pub rule: ApproachRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition1Report {
    pub passes: bool,
    pub failing_components: Vec<usize>,
}

/// One sample of a simply connected boundary traversal (slits spliced in).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraversalSample {
    pub point: C64,
    pub component: usize,
    pub parameter: f64,
}

impl PlanarDomain {
    /// Build an unvalidated domain from a spec.
    pub fn from_spec(spec: DomainSpec) -> Result<Self> {
        if spec.components.is_empty() {
            return Err(Error::InvalidDomain("no boundary components".into()));
        }
        let mut components = Vec::with_capacity(spec.components.len());
        for (i, c) in spec.components.iter().enumerate() {
            let role = if i == 0 { Role::Outer } else { Role::Inner };
            let shape = match c {
                ComponentSpec::Polyline { vertices, .. } => {
                    if vertices.len() < 3 {
                        return Err(Error::InvalidDomain(format!(
                            "component {i}: polyline needs at least 3 vertices"
                        )));
                    }
                    Shape::Polyline(vertices.iter().map(|p| spec::pt(*p)).collect())
                }
                ComponentSpec::Circle { center, radius, .. } => {
                    if !(*radius > 0.0 && radius.is_finite()) {
                        return Err(Error::InvalidDomain(format!(
                            "component {i}: radius must be positive"
                        )));
                    }
                    Shape::Circle {
                        center: spec::pt(*center),
                        radius: *radius,
                    }
                }
                ComponentSpec::Slit { endpoints } => {
                    let (a, b) = (spec::pt(endpoints[0]), spec::pt(endpoints[1]));
                    if (a - b).norm() <= VERTEX_TOL {
                        return Err(Error::InvalidDomain(format!(
                            "component {i}: slit has zero length"
                        )));
                    }
                    Shape::Slit { start: a, end: b }
                }
            };
            components.push(BoundaryComponent::new(shape, role));
        }
        if components[0].is_degenerate() {
            return Err(Error::InvalidDomain(
                "outer component cannot be a slit".into(),
            ));
        }
        let bbox = components[0].bounds();
        Ok(PlanarDomain {
            name: spec.name.clone(),
            components,
            base_point: spec::pt(spec.base_point),
            bbox,
            spec,
            validated: false,
            index: OnceLock::new(),
        })
    }

    /// Build and validate in one step.
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let mut d = Self::from_spec(spec)?;
        d.validate()?;
        Ok(d)
    }

    pub fn disk() -> Self {
        Self::new(DomainSpec::disk()).expect("unit disk is valid")
    }

    pub fn annulus(mu: f64) -> Result<Self> {
        Self::new(DomainSpec::annulus(mu))
    }

    pub fn slit_disk() -> Self {
        Self::new(DomainSpec::slit_disk()).expect("slit disk is valid")
    }

    pub fn square() -> Self {
        Self::new(DomainSpec::square()).expect("square is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn components(&self) -> &[BoundaryComponent] {
        &self.components
    }

    pub fn base_point(&self) -> C64 {
        self.base_point
    }

    pub fn bounding_box(&self) -> (C64, C64) {
        self.bbox
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Structural validation: simple components, pairwise disjointness
    /// (slits may touch other components at their endpoints), inner
    /// components inside the outer one and an interior base point.
    pub fn validate(&mut self) -> Result<()> {
        for (i, c) in self.components.iter().enumerate() {
            if let Shape::Polyline(v) = c.shape() {
                if let Some((a, b)) = first_self_intersection(v) {
                    return Err(Error::InvalidDomain(format!(
                        "component {i} is not simple: edges {a} and {b} intersect"
                    )));
                }
            }
        }
        let outer = &self.components[0];
        for (i, c) in self.components.iter().enumerate().skip(1) {
            let probe = c.point_at(0.25);
            if outer.winding(probe) == 0 && outer.nearest(probe).0 > VERTEX_TOL {
                return Err(Error::InvalidDomain(format!(
                    "component {i} is not inside the outer component"
                )));
            }
        }
        for i in 0..self.components.len() {
            for j in (i + 1)..self.components.len() {
                let (a, b) = (&self.components[i], &self.components[j]);
                let gap = component_gap(a, b);
                let touching_allowed = a.is_degenerate() || b.is_degenerate();
                if gap <= VERTEX_TOL && !touching_allowed {
                    return Err(Error::InvalidDomain(format!(
                        "components {i} and {j} intersect"
                    )));
                }
                if touching_allowed && crosses_interior(a, b) {
                    return Err(Error::InvalidDomain(format!(
                        "slit component crosses component {}",
                        if a.is_degenerate() { j } else { i }
                    )));
                }
                // Nested inner components would make the region between them a
                // separate domain.
                if !a.is_degenerate()
                    && !b.is_degenerate()
                    && i > 0
                    && (a.winding(b.point_at(0.0)) != 0 || b.winding(a.point_at(0.0)) != 0)
                {
                    return Err(Error::InvalidDomain(format!(
                        "inner components {i} and {j} are nested"
                    )));
                }
            }
        }
        self.validated = true;
        if !self.inside(self.base_point) {
            self.validated = false;
            return Err(Error::InvalidDomain(format!(
                "base point {} is not in the domain",
                self.base_point
            )));
        }
        Ok(())
    }

    fn require_validated(&self) -> Result<()> {
        if self.validated {
            Ok(())
        } else {
            Err(Error::ValidationRequired(self.name.clone()))
        }
    }

    /// Membership in the open domain; fails on an unvalidated domain.
    pub fn contains(&self, z: C64) -> Result<bool> {
        self.require_validated()?;
        Ok(self.inside(z))
    }

    fn index(&self) -> &BoundaryIndex {
        self.index.get_or_init(|| {
            BoundaryIndex::build(&self.components, self.bbox, |z| self.inside_exhaustive(z))
        })
    }

    /// Membership without the validation check.
    pub fn inside(&self, z: C64) -> bool {
        match self.index().state(z) {
            CellState::Inside => true,
            CellState::Outside => false,
            CellState::Mixed => self.inside_exhaustive(z),
        }
    }

    fn inside_exhaustive(&self, z: C64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        let (lo, hi) = self.bbox;
        if z.re < lo.re || z.re > hi.re || z.im < lo.im || z.im > hi.im {
            return false;
        }
        for (i, c) in self.components.iter().enumerate() {
            let w = c.winding(z);
            let ok = if i == 0 { w.abs() == 1 } else { w == 0 };
            if !ok {
                return false;
            }
        }
        self.components
            .iter()
            .map(|c| c.nearest(z).0)
            .fold(f64::INFINITY, f64::min)
            > VERTEX_TOL
    }

    /// Distance from `z` to the nearest boundary point, without membership checks.
    pub fn boundary_distance(&self, z: C64) -> f64 {
        self.index().distance(z)
    }

    /// Boundary distance with its gradient and Hessian data.
    pub fn boundary_jet(&self, z: C64) -> BoundaryJet {
        self.index().jet(z)
    }

    /// Nearest boundary point: `(distance, point, component, parameter)`.
    pub fn nearest_boundary(&self, z: C64) -> (f64, C64, usize, f64) {
        let mut best = (f64::INFINITY, z, 0, 0.0);
        for (i, c) in self.components.iter().enumerate() {
            let (d, p, t) = c.nearest(z);
            if d < best.0 {
                best = (d, p, i, t);
            }
        }
        best
    }

    /// Euclidean distance to the boundary for an interior point.
    pub fn euclidean_boundary_distance(&self, z: C64) -> Result<f64> {
        if !self.contains(z)? {
            return Err(Error::OutsideDomain(z));
        }
        Ok(self.boundary_distance(z))
    }

    /// Whether the closed segment `[a, b]` meets the boundary.
    pub fn segment_hits_boundary(&self, a: C64, b: C64) -> bool {
        let len = (b - a).norm();
        if len < self.boundary_distance(a) || len < self.boundary_distance(b) {
            return false;
        }
        self.components
            .iter()
            .any(|c| c.meets_segment(a, b, VERTEX_TOL))
    }

    /// Jordan-component check: every component must be a non-degenerate
    /// simple closed curve. Slits are reported as failures.
    pub fn validate_condition1(&self) -> Condition1Report {
        let failing_components: Vec<usize> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_degenerate())
            .map(|(i, _)| i)
            .collect();
        Condition1Report {
            passes: failing_components.is_empty(),
            failing_components,
        }
    }

    /// Boundary point at `(component, parameter)`.
    pub fn boundary_point(
        &self,
        component: usize,
        parameter: f64,
        side_hint: Option<C64>,
    ) -> Result<BoundaryPoint> {
        let c = self
            .components
            .get(component)
            .ok_or_else(|| Error::Domain(format!("no boundary component {component}")))?;
        let parameter = parameter.rem_euclid(1.0);
        Ok(BoundaryPoint {
            component,
            parameter,
            coordinate: c.point_at(parameter),
            side_hint: side_hint.map(|h| h / h.norm()),
        })
    }

    /// Boundary point nearest to `z`. On slits the pass is chosen from `side_hint`.
    pub fn locate_boundary_point(&self, z: C64, side_hint: Option<C64>) -> Result<BoundaryPoint> {
        let (d, p, comp, mut t) = self.nearest_boundary(z);
        if d > 1e-9 {
            return Err(Error::Domain(format!(
                "{z} is not on the boundary (distance {d:.3e})"
            )));
        }
        let c = &self.components[comp];
        if c.is_degenerate() {
            let hint = side_hint.ok_or_else(|| {
                Error::Precondition(format!(
                    "boundary point {z} lies on a slit and needs a side hint"
                ))
            })?;
            if geometry::dot(c.inward_normal(t), hint) < 0.0 {
                t = 1.0 - t;
            }
        }
        Ok(BoundaryPoint {
            component: comp,
            parameter: t.rem_euclid(1.0),
            coordinate: p,
            side_hint: side_hint.map(|h| h / h.norm()),
        })
    }

    /// Radial-dyadic approach sequence `target + d0 2^-k nu`, `k = 0..n`.
    ///
    /// `nu` is the side hint when given, otherwise the inward normal. `d0` is
    /// halved (at most 20 times) until every point is interior.
    pub fn approach_sequence(
        &self,
        target: &BoundaryPoint,
        n: usize,
        d0: f64,
    ) -> Result<ApproachSequence> {
        self.require_validated()?;
        let comp = self
            .components
            .get(target.component)
            .ok_or_else(|| Error::Domain(format!("no boundary component {}", target.component)))?;
        let nu = match target.side_hint {
            Some(h) => h / h.norm(),
            None if comp.is_degenerate() => {
                return Err(Error::Precondition(
                    "approach to a slit point requires a side hint".into(),
                ))
            }
            None => comp.inward_normal(target.parameter),
        };
        let mut d = d0;
        for _ in 0..=20 {
            let points: Vec<C64> = (0..n)
                .map(|k| target.coordinate + nu * (d * 0.5f64.powi(k as i32)))
                .collect();
            if points.iter().all(|&z| self.inside(z)) {
                return Ok(ApproachSequence {
                    target: *target,
                    points,
                    rule: ApproachRule::RadialDyadic,
                });
            }
            d *= 0.5;
        }
        Err(Error::Geometry(format!(
            "no interior approach to {} found after 20 halvings of d0 = {d0}",
            target.coordinate
        )))
    }

    /// Custom approach sequence; points must be interior and strictly approach the target.
    pub fn custom_approach(
        &self,
        target: &BoundaryPoint,
        points: Vec<C64>,
    ) -> Result<ApproachSequence> {
        self.require_validated()?;
        let mut last = f64::INFINITY;
        for &z in &points {
            if !self.inside(z) {
                return Err(Error::OutsideDomain(z));
            }
            let d = (z - target.coordinate).norm();
            if d >= last {
                return Err(Error::Precondition(
                    "approach points must get strictly closer to the target".into(),
                ));
            }
            last = d;
        }
        Ok(ApproachSequence {
            target: *target,
            points,
            rule: ApproachRule::Custom,
        })
    }

    /// True when every inner component is a slit attached to the outer boundary.
    pub fn is_simply_connected(&self) -> bool {
        self.components.iter().skip(1).all(|c| match *c.shape() {
            Shape::Slit { start, end } => {
                let outer = &self.components[0];
                outer.nearest(start).0 <= 1e-9 || outer.nearest(end).0 <= 1e-9
            }
            _ => false,
        })
    }

    /// Closed boundary traversal of a simply connected domain with about `n`
    /// samples, keeping the domain on the left. Slits attached to the outer
    /// component are spliced in as excursions; any other component makes
    /// the domain multiply connected.
    pub fn simply_connected_traversal(&self, n: usize) -> Result<Vec<TraversalSample>> {
        self.require_validated()?;
        let outer = &self.components[0];
        let mut anchors = Vec::new();
        for (i, c) in self.components.iter().enumerate().skip(1) {
            let Shape::Slit { start, end } = *c.shape() else {
                return Err(Error::UnsupportedTopology(format!(
                    "component {i} encloses a hole; the domain is multiply connected"
                )));
            };
            let (ds, _, ts) = outer.nearest(start);
            let (de, _, te) = outer.nearest(end);
            let anchored_at_end = if de <= 1e-9 {
                true
            } else if ds <= 1e-9 {
                false
            } else {
                return Err(Error::UnsupportedTopology(format!(
                    "slit {i} does not touch the outer boundary"
                )));
            };
            anchors.push((i, if anchored_at_end { te } else { ts }, anchored_at_end));
        }
        let total_len: f64 = self.components.iter().map(|c| c.length()).sum();
        let outer_n = ((outer.length() / total_len) * n as f64).ceil() as usize;
        let mut out_samples: Vec<TraversalSample> = outer
            .samples(outer_n)
            .into_iter()
            .map(|(t, p)| TraversalSample {
                point: p,
                component: 0,
                parameter: t,
            })
            .collect();
        // Insert exact anchor points so the excursions start on the boundary.
        for &(_, ta, _) in &anchors {
            if !out_samples.iter().any(|s| (s.parameter - ta).abs() < 1e-12) {
                let pos = out_samples.partition_point(|s| s.parameter < ta);
                out_samples.insert(
                    pos,
                    TraversalSample {
                        point: outer.point_at(ta),
                        component: 0,
                        parameter: ta,
                    },
                );
            }
        }
        let mut result = Vec::with_capacity(n + 8);
        for s in &out_samples {
            for &(ci, _, at_end) in anchors.iter().filter(|a| (a.1 - s.parameter).abs() < 1e-12) {
                let c = &self.components[ci];
                let m = ((c.length() / total_len) * n as f64).ceil().max(8.0) as usize;
                let half = m / 2;
                // The pass leaving the anchor comes first.
                let (first, second) = if at_end { (0.5, 0.0) } else { (0.0, 0.5) };
                result.push(TraversalSample {
                    point: s.point,
                    component: ci,
                    parameter: first,
                });
                for k in 1..=half {
                    let t = first + 0.5 * k as f64 / half as f64;
                    result.push(TraversalSample {
                        point: c.point_at(t),
                        component: ci,
                        parameter: t.rem_euclid(1.0),
                    });
                }
                for k in 1..half {
                    let t = second + 0.5 * k as f64 / half as f64;
                    result.push(TraversalSample {
                        point: c.point_at(t),
                        component: ci,
                        parameter: t,
                    });
                }
            }
            result.push(*s);
        }
        Ok(result)
    }
}

fn first_self_intersection(v: &[C64]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        let (a1, a2) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (b1, b2) = (v[j], v[(j + 1) % n]);
            if adjacent {
                // Adjacent edges may only share their common vertex.
                let shared = if j == i + 1 { a2 } else { a1 };
                let (other_a, other_b) = if j == i + 1 { (a1, b2) } else { (a2, b1) };
                let collinear_back = geometry::cross(other_a - shared, other_b - shared).abs()
                    <= VERTEX_TOL
                    && geometry::dot(other_a - shared, other_b - shared) > 0.0;
                if collinear_back {
                    return Some((i, j));
                }
                continue;
            }
            if segment_distance(a1, a2, b1, b2) <= VERTEX_TOL {
                return Some((i, j));
            }
        }
    }
    None
}

fn component_gap(a: &BoundaryComponent, b: &BoundaryComponent) -> f64 {
    if let (
        Shape::Circle {
            center: c1,
            radius: r1,
        },
        Shape::Circle {
            center: c2,
            radius: r2,
        },
    ) = (a.shape(), b.shape())
    {
        let d = (c1 - c2).norm();
        // Separate, nested, or crossing (gap zero).
        return (d - r1 - r2).max((r1 - r2).abs() - d).max(0.0);
    }
    let pa = a.outline(CIRCLE_OUTLINE);
    let pb = b.outline(CIRCLE_OUTLINE);
    let edges = |p: &Vec<C64>, closed: bool| -> Vec<(C64, C64)> {
        let n = p.len();
        let m = if closed { n } else { n - 1 };
        (0..m).map(|i| (p[i], p[(i + 1) % n])).collect()
    };
    let ea = edges(&pa, !a.is_degenerate());
    let eb = edges(&pb, !b.is_degenerate());
    let mut gap = f64::INFINITY;
    for &(a1, a2) in &ea {
        for &(b1, b2) in &eb {
            gap = gap.min(segment_distance(a1, a2, b1, b2));
        }
    }
    gap
}

/// Whether the slit among `a`, `b` crosses the other component other than by
/// touching it at a slit endpoint.
fn crosses_interior(a: &BoundaryComponent, b: &BoundaryComponent) -> bool {
    let (slit, other) = if a.is_degenerate() { (a, b) } else { (b, a) };
    let Shape::Slit { start, end } = *slit.shape() else {
        return false;
    };
    // Sample the open slit; every interior sample must avoid the other component.
    (1..64).any(|k| {
        let z = start + (end - start) * (k as f64 / 64.0);
        other.nearest(z).0 <= VERTEX_TOL
    }) || (other.is_degenerate() && component_gap(slit, other) <= VERTEX_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn disk_membership() {
        let d = PlanarDomain::disk();
        assert!(d.contains(c(0., 0.)).unwrap());
        assert!(!d.contains(c(1., 0.)).unwrap());
        assert!(!d.contains(c(1.5, 0.)).unwrap());
    }

    #[test]
    fn slit_points_are_excluded() {
        let d = PlanarDomain::slit_disk();
        assert!(!d.contains(c(0.5, 0.)).unwrap());
        assert!(d.contains(c(0.5, 1e-6)).unwrap());
        assert!(d.contains(c(-0.5, 0.)).unwrap());
    }

    #[test]
    fn unvalidated_domain_refuses_queries() {
        let d = PlanarDomain::from_spec(DomainSpec::disk()).unwrap();
        assert!(matches!(
            d.contains(c(0., 0.)),
            Err(Error::ValidationRequired(_))
        ));
    }

    #[test]
    fn boundary_distances() {
        let d = PlanarDomain::disk();
        assert!((d.euclidean_boundary_distance(c(0., 0.)).unwrap() - 1.0).abs() < 1e-15);
        assert!((d.euclidean_boundary_distance(c(0.5, 0.)).unwrap() - 0.5).abs() < 1e-15);
        let a = PlanarDomain::annulus(0.3).unwrap();
        assert!((a.euclidean_boundary_distance(c(0.6, 0.)).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            d.euclidean_boundary_distance(c(2., 0.)),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn condition1_reports() {
        assert!(PlanarDomain::disk().validate_condition1().passes);
        let two_holes = PlanarDomain::new(DomainSpec::circle_domain(&[
            (c(-0.4, 0.), 0.2),
            (c(0.4, 0.), 0.2),
        ]))
        .unwrap();
        assert!(two_holes.validate_condition1().passes);
        let r = PlanarDomain::slit_disk().validate_condition1();
        assert!(!r.passes);
        assert_eq!(r.failing_components, vec![1]);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        let bowtie = DomainSpec::jordan(&[c(0., 0.), c(1., 1.), c(1., 0.), c(0., 1.)]);
        assert!(matches!(
            PlanarDomain::new(bowtie),
            Err(Error::InvalidDomain(_))
        ));
        let overlapping = DomainSpec::circle_domain(&[(c(-0.1, 0.), 0.2), (c(0.1, 0.), 0.2)]);
        assert!(PlanarDomain::new(overlapping).is_err());
        let sticking_out = DomainSpec::circle_domain(&[(c(0.9, 0.), 0.2)]);
        assert!(PlanarDomain::new(sticking_out).is_err());
        let mut bad_base = DomainSpec::disk();
        bad_base.base_point = [2.0, 0.0];
        assert!(PlanarDomain::new(bad_base).is_err());
    }

    #[test]
    fn approach_sequences() {
        let d = PlanarDomain::disk();
        let target = d.locate_boundary_point(c(1., 0.), None).unwrap();
        let seq = d.approach_sequence(&target, 3, 0.1).unwrap();
        let want = [0.9, 0.95, 0.975];
        for (z, w) in seq.points.iter().zip(want) {
            assert!((z - c(w, 0.)).norm() < 1e-12, "{z} vs {w}");
        }

        let s = PlanarDomain::slit_disk();
        let p = s
            .locate_boundary_point(c(0.5, 0.), Some(c(0., 1.)))
            .unwrap();
        assert!((p.parameter - 0.25).abs() < 1e-12);
        let seq = s.approach_sequence(&p, 2, 0.1).unwrap();
        assert!((seq.points[0] - c(0.5, 0.1)).norm() < 1e-12);
        assert!((seq.points[1] - c(0.5, 0.05)).norm() < 1e-12);
        let lower = s
            .locate_boundary_point(c(0.5, 0.), Some(c(0., -1.)))
            .unwrap();
        assert!((lower.parameter - 0.75).abs() < 1e-12);
        assert!(s.locate_boundary_point(c(0.5, 0.), None).is_err());

        let shrunk = d.approach_sequence(&target, 4, 10.0).unwrap();
        assert!(shrunk.points.iter().all(|&z| d.inside(z)));
    }

    #[test]
    fn slit_disk_traversal_visits_both_sides() {
        let s = PlanarDomain::slit_disk();
        let tr = s.simply_connected_traversal(256).unwrap();
        let on_slit: Vec<_> = tr.iter().filter(|t| t.component == 1).collect();
        assert!(on_slit
            .iter()
            .any(|t| t.parameter < 0.5 && t.parameter > 0.0));
        assert!(on_slit.iter().any(|t| t.parameter > 0.5));
        // The tip appears exactly once.
        assert_eq!(tr.iter().filter(|t| t.point.norm() < 1e-12).count(), 1);
        // Anchor appears twice: once before and once after the excursion.
        assert_eq!(
            tr.iter()
                .filter(|t| (t.point - c(1., 0.)).norm() < 1e-12)
                .count(),
            2
        );
        assert!(PlanarDomain::annulus(0.3)
            .unwrap()
            .simply_connected_traversal(64)
            .is_err());
    }
}
