use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::report::{Record, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// `(t, value)` series of ray-pair comparisons.
    Tails,
    /// Busemann samples on a sub-grid.
    Levelsets,
    /// Ray polylines.
    Rays,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::Tails, PlotKind::Levelsets, PlotKind::Rays];

    fn label(self) -> &'static str {
        match self {
            PlotKind::Tails => "tails",
            PlotKind::Levelsets => "levelsets",
            PlotKind::Rays => "rays",
        }
    }
}

fn num(x: &Value) -> String {
    x.as_f64()
        .map(|x| format!("{x:.16e}"))
        .unwrap_or_else(|| "nan".into())
}

fn floats(v: &Value) -> Vec<&Value> {
    v.as_array().map(|a| a.iter().collect()).unwrap_or_default()
}

fn writer(
    dir: &Path,
    r: &Record,
    kind: PlotKind,
    header: &[&str],
) -> CliResult<(PathBuf, csv::Writer<std::fs::File>)> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(format!("{:02}_{}_{}.csv", r.index, r.op, kind.label()));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    Ok((path, w))
}

fn tails(dir: &Path, r: &Record) -> CliResult<Option<PathBuf>> {
    let rep = &r.outputs["report"];
    if !rep["gaps"].is_array() {
        return Ok(None);
    }
    let (path, mut w) = writer(dir, r, PlotKind::Tails, &["series", "t", "value", "seed"])?;
    let seed = r.seed.to_string();
    for (series, ts, vs) in [
        ("gap", "schedule", "gaps"),
        ("shifted_tail", "tail_schedule", "shifted_tail"),
    ] {
        for (t, v) in floats(&rep[ts]).into_iter().zip(floats(&rep[vs])) {
            w.write_record([series, &num(t), &num(v), &seed])?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(Some(path))
}

fn levelsets(dir: &Path, r: &Record) -> CliResult<Option<PathBuf>> {
    let ls = &r.outputs["levelset"];
    if !ls["values"].is_array() {
        return Ok(None);
    }
    let (path, mut w) = writer(dir, r, PlotKind::Levelsets, &["x", "y", "value", "seed"])?;
    let seed = r.seed.to_string();
    for (p, v) in floats(&ls["points"]).into_iter().zip(floats(&ls["values"])) {
        w.write_record([&num(&p[0]), &num(&p[1]), &num(v), &seed])?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(Some(path))
}

fn rays(dir: &Path, r: &Record) -> CliResult<Option<PathBuf>> {
    let list = floats(&r.outputs["rays"]);
    if list.is_empty() {
        return Ok(None);
    }
    let (path, mut w) = writer(dir, r, PlotKind::Rays, &["ray", "index", "x", "y", "seed"])?;
    let seed = r.seed.to_string();
    for ray in list {
        let label = ray["label"].as_str().unwrap_or("");
        for (k, p) in floats(&ray["vertices"]).into_iter().enumerate() {
            w.write_record([label, &k.to_string(), &num(&p[0]), &num(&p[1]), &seed])?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(Some(path))
}

/// Write one CSV of `kind` per record that carries such data. A report
/// without any is left alone with a warning.
pub fn emit_plotdata(report: &Report, kind: PlotKind, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let files = write_kind(report, kind, dir)?;
    if files.is_empty() {
        log::warn!(
            "scenario `{}` has no records with {} data",
            report.scenario,
            kind.label()
        );
    }
    Ok(files)
}

pub(crate) fn write_kind(report: &Report, kind: PlotKind, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for r in &report.records {
        let f = match kind {
            PlotKind::Tails => tails(dir, r)?,
            PlotKind::Levelsets => levelsets(dir, r)?,
            PlotKind::Rays => rays(dir, r)?,
        };
        files.extend(f);
    }
    Ok(files)
}
