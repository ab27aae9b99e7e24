//! Boundary-at-infinity experiments built on a [`MetricEngine`]: Gromov
//! products, horofunction samples, Busemann functions, asymptoticity of
//! rays, squeezing bounds, δ-hyperbolicity, visibility, localization and
//! boundary separation.
//!
//! Functions on the domain are represented by their values on a finite
//! [`ProbeSet`], normalised to vanish at the base probe.
//!
//! [`MetricEngine`]: crate::metric::MetricEngine

mod horofunction;
mod localization;
mod pairs;
mod squeezing;
mod survey;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use horofunction::{
    busemann_eval, busemann_iterates, horofunction_limit, lipschitz_excess, psi_sample,
    BusemannIterates, HorofunctionSample, ProbeSet, SampleSource,
};
pub use localization::{localization_constant, restrict_to_rectangle, LocalizationEstimate};
pub use pairs::{asymptoticity_test, default_shift_grid, strong_asymptoticity_test, RayPairReport};
pub use squeezing::{enveloping_domain, squeezing_lower_bound, SqueezingEstimate};
pub use survey::{
    boundary_separation_test, delta_hyperbolicity_estimate, four_point_delta, gromov_product,
    sample_region, visibility_probe, DeltaEstimate, SeparationEstimate, VisibilityEstimate,
    SURVEY_MIN_DELTA,
};

/// Verdict thresholds shared by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Largest final shifted tail accepted as strongly asymptotic.
    pub strong_tail: f64,
    /// Allowed increase between consecutive iterates that should not increase.
    pub monotone_slack: f64,
    /// Largest growth of the running sup over the last third of the schedule
    /// for an asymptotic verdict.
    pub asymptotic_increase: f64,
    /// Largest Cauchy gap of a converged horofunction limit.
    pub cauchy_gap: f64,
    /// Smallest sample gap that counts as separation.
    pub separation: f64,
    /// Slack in the 1-Lipschitz bound of a horofunction sample.
    pub lipschitz_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            strong_tail: 5e-2,
            monotone_slack: 1e-2,
            asymptotic_increase: 1e-2,
            cauchy_gap: 5e-2,
            separation: 0.1,
            lipschitz_slack: 2.0 * crate::metric::OPTIMIZATION_TOLERANCE,
        }
    }
}

/// Axis-parallel rectangle `[lo.re, hi.re] x [lo.im, hi.im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: C64,
    pub hi: C64,
}

impl Rect {
    pub fn new(lo: C64, hi: C64) -> Self {
        Rect { lo, hi }
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.lo.re && z.re <= self.hi.re && z.im >= self.lo.im && z.im <= self.hi.im
    }

    /// True when `other` lies in the interior of `self`.
    pub fn compactly_contains(&self, other: &Rect) -> bool {
        other.lo.re > self.lo.re
            && other.lo.im > self.lo.im
            && other.hi.re < self.hi.re
            && other.hi.im < self.hi.im
    }

    pub fn is_valid(&self) -> bool {
        self.lo.re < self.hi.re && self.lo.im < self.hi.im
    }
}

/// The schedule `0.5, 1, 1.5, ..., t_max`.
pub fn default_schedule(t_max: f64) -> Vec<f64> {
    let n = (t_max / 0.5 + 1e-9).floor() as usize;
    (1..=n).map(|k| 0.5 * k as f64).collect()
}

/// Default schedule end.
pub const DEFAULT_T_MAX: f64 = 6.0;

/// Approach sequences built by the experiments start this far from the target.
pub const DEFAULT_D0: f64 = 0.25;

pub(crate) fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Index where the last third of a schedule of length `n` begins.
pub(crate) fn last_third(n: usize) -> usize {
    n - n.div_ceil(3)
}
