//! Hyperbolic density, distances and geodesics (curvature -4, so that
//! `k_D(0, r) = artanh r`).

mod closed;
mod field;
mod grid;
mod liouville;
mod path;
mod rays;
mod refine;

use std::sync::Arc;

use num_complex::Complex64 as C64;

pub use closed::{half_plane_density, unit_annulus_jet, unit_disk_jet, ClosedForm, Jet};
pub use field::{Method, MetricField, FIELD_FORMAT_VERSION};
pub use grid::{bicubic, Grid};
pub use liouville::{solve_liouville, LiouvilleOptions};
pub use path::{GeodesicPath, MetricEngine, PathKind, OPTIMIZATION_TOLERANCE};
pub use rays::{hausdorff, QuasiGeodesicCertificate, RayOptions, DEFAULT_SEED};
pub use refine::RefineOptions;

use crate::conformal::RiemannMap;
use crate::domain::PlanarDomain;
use crate::error::{Error, Result};

/// Which density method to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MethodChoice {
    /// Closed form when available, then conformal transport for simply
    /// connected domains, then the Liouville solver.
    #[default]
    Auto,
    ClosedForm,
    Transport,
    Pde,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "closed-form" => Ok(MethodChoice::ClosedForm),
            "conformal-transport" | "transport" => Ok(MethodChoice::Transport),
            "liouville-pde" | "pde" => Ok(MethodChoice::Pde),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

/// Hyperbolic density at `z` without building a grid.
///
/// Closed forms are evaluated directly; simply connected domains use the
/// Riemann map. Anything else needs a [`MetricField`].
pub fn density_at(domain: &Arc<PlanarDomain>, z: C64, hint: MethodChoice) -> Result<f64> {
    if !domain.contains(z)? {
        return Err(Error::OutsideDomain(z));
    }
    let closed = ClosedForm::detect(domain);
    match (hint, closed) {
        (MethodChoice::Auto | MethodChoice::ClosedForm, Some(cf)) => {
            return Ok(cf.jet(z).density())
        }
        (MethodChoice::ClosedForm, None) => {
            return Err(Error::NeedsField(domain.name().to_string()));
        }
        _ => {}
    }
    match hint {
        MethodChoice::Auto | MethodChoice::Transport if domain.is_simply_connected() => {
            let map = RiemannMap::compute(domain.clone(), domain.base_point())?;
            Ok(map.log_density(z).exp())
        }
        _ => Err(Error::NeedsField(domain.name().to_string())),
    }
}

/// Default grid spacing for transport and closed-form fields.
pub const TRANSPORT_SPACING: f64 = 1.0 / 128.0;

/// Build a metric field, picking the method as described on [`MethodChoice`].
pub fn solve_metric_field(
    domain: Arc<PlanarDomain>,
    h: f64,
    choice: MethodChoice,
) -> Result<MetricField> {
    if !domain.is_validated() {
        return Err(Error::ValidationRequired(domain.name().to_string()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Resolution(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    let closed = ClosedForm::detect(&domain).is_some();
    let simply = domain.is_simply_connected();
    match choice {
        MethodChoice::ClosedForm => MetricField::closed_form(domain, h),
        MethodChoice::Auto if closed => MetricField::closed_form(domain, h),
        MethodChoice::Transport | MethodChoice::Auto if simply => {
            let map = Arc::new(RiemannMap::compute(domain.clone(), domain.base_point())?);
            MetricField::transport(domain, map, h)
        }
        MethodChoice::Transport => Err(Error::UnsupportedTopology(format!(
            "conformal transport needs a simply connected domain, `{}` is not",
            domain.name()
        ))),
        MethodChoice::Pde | MethodChoice::Auto => {
            solve_liouville(domain, h, LiouvilleOptions::default())
        }
    }
}
