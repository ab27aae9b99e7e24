use std::path::Path;
use std::sync::{Arc, Mutex};

use horolab_core::asymptotics::{Thresholds, DEFAULT_T_MAX};
use horolab_core::domain::{DomainSpec, PlanarDomain};
use horolab_core::metric::{MethodChoice, MetricEngine, TRANSPORT_SPACING};
use horolab_core::C64;

use crate::cache::Cache;
use crate::error::{CliError, CliResult};
use crate::scenario::{DomainRef, Point};

pub fn point(p: Point) -> C64 {
    C64::new(p[0], p[1])
}

/// Resolve a domain reference; files are relative to `base_dir`.
pub fn resolve_domain(r: &DomainRef, base_dir: &Path) -> CliResult<PlanarDomain> {
    let spec = match r {
        DomainRef::Builtin(name) => DomainSpec::builtin(name)?,
        DomainRef::File { file } => {
            let path = base_dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            DomainSpec::from_json(&text)?
        }
        DomainRef::Inline(spec) => spec.clone(),
    };
    Ok(PlanarDomain::new(spec)?)
}

/// Everything an operation runs against: the domain, numerical settings and
/// the engines built so far.
pub struct Lab {
    pub domain: Arc<PlanarDomain>,
    pub h: f64,
    pub method: MethodChoice,
    pub seed: u64,
    pub t_max: f64,
    pub thresholds: Thresholds,
    pub cache: Cache,
    engines: Mutex<Vec<(String, u64, Arc<MetricEngine>)>>,
}

impl Lab {
    pub fn new(
        domain: PlanarDomain,
        h: Option<f64>,
        method: MethodChoice,
        seed: u64,
        t_max: Option<f64>,
        thresholds: Thresholds,
        cache: Cache,
    ) -> CliResult<Self> {
        let h = h.unwrap_or(TRANSPORT_SPACING);
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Usage(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        Ok(Lab {
            domain: Arc::new(domain),
            h,
            method,
            seed,
            t_max: t_max.unwrap_or(DEFAULT_T_MAX),
            thresholds,
            cache,
            engines: Mutex::new(Vec::new()),
        })
    }

    /// Engine of the scenario domain at the scenario spacing.
    pub fn engine(&self) -> CliResult<Arc<MetricEngine>> {
        self.engine_for(&self.domain.clone(), self.h)
    }

    /// Engine of any domain at spacing `h`, built once.
    pub fn engine_for(&self, domain: &Arc<PlanarDomain>, h: f64) -> CliResult<Arc<MetricEngine>> {
        let hash = domain.spec().hash();
        let mut engines = self.engines.lock().unwrap();
        if let Some(e) = engines.iter().find(|e| e.0 == hash && e.1 == h.to_bits()) {
            return Ok(e.2.clone());
        }
        let field = self.cache.field(domain, h, self.method)?;
        let engine = Arc::new(MetricEngine::new(Arc::new(field)));
        engines.push((hash, h.to_bits(), engine.clone()));
        Ok(engine)
    }
}
