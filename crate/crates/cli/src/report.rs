use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use horolab_core::asymptotics::Thresholds;
use horolab_core::conformal::MAP_FORMAT_VERSION;
use horolab_core::metric::{MethodChoice, FIELD_FORMAT_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cache::{Cache, CacheKey, CacheStats};
use crate::error::{CliError, CliResult};
use crate::lab::{resolve_domain, Lab};
use crate::ops::execute;
use crate::plot::{write_kind, PlotKind};
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub index: usize,
    pub op: String,
    pub seed: u64,
    pub inputs: Value,
    pub outputs: Value,
    pub verdicts: Vec<Verdict>,
    pub error: Option<String>,
    /// False when the operation failed or any verdict failed.
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub horolab: String,
    pub field_format: u32,
    pub map_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            horolab: env!("CARGO_PKG_VERSION").into(),
            field_format: FIELD_FORMAT_VERSION,
            map_format: MAP_FORMAT_VERSION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainInfo {
    pub name: String,
    pub hash: String,
}

/// Everything a run produced except timings, which would break
/// byte-for-byte reproducibility and live in a sidecar file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub versions: Versions,
    pub domain: DomainInfo,
    pub h: f64,
    pub method: String,
    pub t_max: f64,
    pub thresholds: Thresholds,
    pub halted: bool,
    pub cache_keys: Vec<CacheKey>,
    pub records: Vec<Record>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OpTiming {
    pub index: usize,
    pub op: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub scenario: String,
    pub seconds: f64,
    pub operations: Vec<OpTiming>,
    pub cache: CacheStats,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub h: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub parallel: bool,
    /// Cache root; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl Report {
    /// Exit status: 0 on pass, 1 on fail.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        to_json(&serde_json::to_value(self).expect("reports serialize"))
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join("report.json");
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path,
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Floats with 17 significant digits.
fn number(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0" } else { "0.0" }.into();
    }
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => write!(out, "{u}").unwrap(),
            (_, Some(i), _) if !n.is_f64() => write!(out, "{i}").unwrap(),
            (_, _, Some(x)) => out.push_str(&number(x)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            // Short arrays of scalars stay on one line.
            if items.len() <= 4 && items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, i, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, i, indent + 2);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, val)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(out, val, indent + 2);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and floats in `{:.16e}` form.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn run_one(lab: &Lab, index: usize, op: &crate::scenario::Operation) -> (Record, OpTiming) {
    let start = Instant::now();
    let inputs = serde_json::to_value(op).expect("operations serialize");
    let (outputs, verdicts, error) = match execute(lab, op) {
        Ok((o, v)) => (o, v, None),
        Err(e) => (Value::Null, Vec::new(), Some(e.to_string())),
    };
    let passed = error.is_none() && verdicts.iter().all(|v| v.passed);
    let record = Record {
        index,
        op: op.name().into(),
        seed: lab.seed,
        inputs,
        outputs,
        verdicts,
        error,
        passed,
    };
    let timing = OpTiming {
        index,
        op: op.name().into(),
        seconds: start.elapsed().as_secs_f64(),
    };
    (record, timing)
}

/// Run a parsed scenario; files it names are resolved against `base_dir`.
pub fn execute_scenario(
    scenario: &Scenario,
    base_dir: &Path,
    opts: &RunOptions,
) -> CliResult<(Report, Timings)> {
    let start = Instant::now();
    let domain = resolve_domain(&scenario.domain, base_dir)?;
    let method = MethodChoice::from_str(&scenario.method)?;
    let lab = Lab::new(
        domain,
        opts.h.or(scenario.h),
        method,
        opts.seed.unwrap_or(scenario.seed),
        scenario.t_max,
        scenario.thresholds,
        Cache::new(opts.cache_dir.clone()),
    )?;
    let ops = &scenario.operations;
    let mut results: Vec<(Record, OpTiming)> = if opts.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = ops
                .iter()
                .enumerate()
                .map(|(i, op)| {
                    let lab = &lab;
                    s.spawn(move || run_one(lab, i, op))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("operation thread panicked"))
                .collect()
        })
    } else {
        let mut out = Vec::with_capacity(ops.len());
        for (i, op) in ops.iter().enumerate() {
            let r = run_one(&lab, i, op);
            let failed = r.0.error.is_some();
            out.push(r);
            if failed && scenario.halt_on_error {
                break;
            }
        }
        out
    };
    let mut halted = false;
    if scenario.halt_on_error {
        if let Some(k) = results.iter().position(|r| r.0.error.is_some()) {
            halted = k + 1 < ops.len();
            results.truncate(k + 1);
        }
    }
    let (records, op_timings): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let passed = !halted && records.iter().all(|r| r.passed);
    let report = Report {
        scenario: scenario.name.clone(),
        seed: lab.seed,
        versions: Versions::default(),
        domain: DomainInfo {
            name: lab.domain.name().into(),
            hash: lab.domain.spec().hash(),
        },
        h: lab.h,
        method: scenario.method.clone(),
        t_max: lab.t_max,
        thresholds: lab.thresholds,
        halted,
        cache_keys: lab.cache.keys(),
        records,
        passed,
    };
    let timings = Timings {
        scenario: scenario.name.clone(),
        seconds: start.elapsed().as_secs_f64(),
        operations: op_timings,
        cache: lab.cache.stats(),
    };
    Ok((report, timings))
}

/// Flatten a JSON value into `(path, scalar)` rows.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&p, x, rows);
            }
        }
        Value::Array(a) => {
            for (k, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{k}]"), x, rows);
            }
        }
        Value::Number(n) if n.is_f64() => rows.push((prefix.into(), number(n.as_f64().unwrap()))),
        Value::String(s) => rows.push((prefix.into(), s.clone())),
        other => rows.push((prefix.into(), other.to_string())),
    }
}

/// One `key,value` table per record, covering outputs and verdicts.
fn write_record_csv(dir: &Path, r: &Record) -> CliResult<PathBuf> {
    let path = dir.join(format!("{:02}_{}.csv", r.index, r.op));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["key", "value", "seed"])?;
    let seed = r.seed.to_string();
    let mut rows = Vec::new();
    flatten("outputs", &r.outputs, &mut rows);
    flatten("verdicts", &serde_json::to_value(&r.verdicts)?, &mut rows);
    if let Some(e) = &r.error {
        rows.push(("error".into(), e.clone()));
    }
    rows.push(("passed".into(), r.passed.to_string()));
    for (k, v) in rows {
        w.write_record([k.as_str(), v.as_str(), seed.as_str()])?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Write `report.json`, `timings.json`, one CSV per record and all plot data.
pub fn write_outputs(report: &Report, timings: &Timings, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(|e| CliError::io(&path, e))?;
    files.push(path);
    let path = dir.join("timings.json");
    std::fs::write(&path, to_json(&serde_json::to_value(timings)?))
        .map_err(|e| CliError::io(&path, e))?;
    files.push(path);
    for r in &report.records {
        files.push(write_record_csv(dir, r)?);
    }
    for kind in PlotKind::ALL {
        files.extend(write_kind(report, kind, dir)?);
    }
    Ok(files)
}

/// Load, execute and write a scenario file.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> CliResult<Report> {
    let scenario = Scenario::load(path)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let (report, timings) = execute_scenario(&scenario, base_dir, opts)?;
    let out = opts
        .out
        .clone()
        .or_else(|| scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));
    write_outputs(&report, &timings, &out)?;
    Ok(report)
}
