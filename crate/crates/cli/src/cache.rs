//! Write-once caches of metric fields and Riemann maps, keyed by the SHA-256
//! of what determines them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use horolab_core::conformal::{MapRecord, RiemannMap, MAP_FORMAT_VERSION};
use horolab_core::domain::PlanarDomain;
use horolab_core::metric::{
    solve_metric_field, ClosedForm, MethodChoice, MetricField, FIELD_FORMAT_VERSION,
};
use horolab_core::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey {
    pub kind: String,
    pub domain: String,
    pub key: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

/// A cache rooted at `root`, or a pass-through when `root` is `None`.
#[derive(Debug, Default)]
pub struct Cache {
    root: Option<PathBuf>,
    used: Mutex<BTreeMap<String, CacheKey>>,
    stats: Mutex<CacheStats>,
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

pub fn field_key(domain_hash: &str, h: f64, method: &str) -> String {
    digest(&[
        "field",
        &FIELD_FORMAT_VERSION.to_string(),
        domain_hash,
        &format!("{h:.16e}"),
        method,
    ])
}

pub fn map_key(domain_hash: &str, origin: C64) -> String {
    digest(&[
        "map",
        &MAP_FORMAT_VERSION.to_string(),
        domain_hash,
        &format!("{:.16e},{:.16e}", origin.re, origin.im),
    ])
}

fn method_label(domain: &PlanarDomain, choice: MethodChoice) -> &'static str {
    let closed = ClosedForm::detect(domain).is_some();
    match choice {
        MethodChoice::ClosedForm => "closed-form",
        MethodChoice::Auto if closed => "closed-form",
        MethodChoice::Transport => "transport",
        MethodChoice::Auto if domain.is_simply_connected() => "transport",
        MethodChoice::Pde | MethodChoice::Auto => "pde",
    }
}

impl Cache {
    pub fn new(root: Option<PathBuf>) -> Self {
        Cache {
            root,
            ..Default::default()
        }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Keys touched so far, sorted.
    pub fn keys(&self) -> Vec<CacheKey> {
        self.used.lock().unwrap().values().cloned().collect()
    }

    pub fn stats(&self) -> CacheStats {
        *self.stats.lock().unwrap()
    }

    fn note(&self, kind: &str, domain: &PlanarDomain, key: &str) {
        self.used.lock().unwrap().insert(
            format!("{kind}/{key}"),
            CacheKey {
                kind: kind.into(),
                domain: domain.name().into(),
                key: key.into(),
            },
        );
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|r| r.join(kind).join(format!("{key}.bin")))
    }

    fn read(&self, path: &Option<PathBuf>) -> Option<Vec<u8>> {
        let bytes = fs::read(path.as_ref()?).ok();
        let mut s = self.stats.lock().unwrap();
        if bytes.is_some() {
            s.hits += 1;
        } else {
            s.misses += 1;
        }
        bytes
    }

    /// Entries are never overwritten; concurrent writers race on a rename.
    fn write(&self, path: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
        let Some(path) = path else { return Ok(()) };
        if path.exists() {
            return Ok(());
        }
        let dir = path.parent().expect("cache entries live in a directory");
        fs::create_dir_all(dir).map_err(|e| crate::CliError::io(dir, e))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, bytes).map_err(|e| crate::CliError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| crate::CliError::io(path, e))?;
        Ok(())
    }

    /// Riemann map of `domain` sending `origin` to 0.
    pub fn map(&self, domain: &Arc<PlanarDomain>, origin: C64) -> CliResult<Arc<RiemannMap>> {
        let key = map_key(&domain.spec().hash(), origin);
        self.note("maps", domain, &key);
        let path = self.path("maps", &key);
        if let Some(bytes) = self.read(&path) {
            match serde_json::from_slice::<MapRecord>(&bytes)
                .map_err(horolab_core::Error::from)
                .and_then(|r| RiemannMap::from_record(r, domain.clone()))
            {
                Ok(map) => return Ok(Arc::new(map)),
                Err(e) => log::warn!("ignoring cached map {}: {e}", key),
            }
        }
        let map = RiemannMap::compute(domain.clone(), origin)?;
        self.write(&path, &serde_json::to_vec(map.record())?)?;
        Ok(Arc::new(map))
    }

    /// Metric field of `domain` at spacing `h`.
    pub fn field(
        &self,
        domain: &Arc<PlanarDomain>,
        h: f64,
        choice: MethodChoice,
    ) -> CliResult<MetricField> {
        let method = method_label(domain, choice);
        let key = field_key(&domain.spec().hash(), h, method);
        self.note("fields", domain, &key);
        let map = if method == "transport" {
            Some(self.map(domain, domain.base_point())?)
        } else {
            None
        };
        let path = self.path("fields", &key);
        if let Some(bytes) = self.read(&path) {
            match MetricField::from_bytes(&bytes, domain.clone(), map.clone()) {
                Ok(f) => return Ok(f),
                Err(e) => log::warn!("ignoring cached field {}: {e}", key),
            }
        }
        let field = match map {
            Some(map) => MetricField::transport(domain.clone(), map, h)?,
            None => solve_metric_field(domain.clone(), h, choice)?,
        };
        self.write(&path, &field.to_bytes())?;
        Ok(field)
    }
}
