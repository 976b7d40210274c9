//! Aggregation of manifests into a pass/fail table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Relation, RunManifest};
use crate::dynamics::Termination;
use crate::error::{Error, Result};
use crate::experiments::DispersionResult;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub source: String,
    pub check: String,
    pub measured: Option<f64>,
    pub relation: Option<Relation>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub dispersion: Vec<DispersionResult>,
    pub pass: bool,
}

/// Read manifests and tabulate every check plus each run's termination.
pub fn report<P: AsRef<Path>>(paths: &[P]) -> Result<Report> {
    if paths.is_empty() {
        return Err(Error::Domain("no manifests given".into()));
    }
    let mut rows = Vec::new();
    let mut dispersion = Vec::new();
    for p in paths {
        let path = manifest_path(p.as_ref());
        let m = RunManifest::read(&path)?;
        let source = path.display().to_string();
        rows.push(ReportRow {
            source: source.clone(),
            check: format!("termination:{}", m.termination.reason.as_str()),
            measured: m.termination.value,
            relation: None,
            tolerance: None,
            pass: m.termination.reason == Termination::Completed,
        });
        rows.extend(m.checks.iter().map(|c| ReportRow {
            source: source.clone(),
            check: c.name.clone(),
            measured: c.measured,
            relation: Some(c.relation),
            tolerance: Some(c.tolerance),
            pass: c.pass,
        }));
        if let Some(d) = m.results.get("dispersion") {
            let d: DispersionResult = serde_json::from_value(d.clone())
                .map_err(|e| Error::Domain(format!("{source}: {e}")))?;
            dispersion.push(d);
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(Report { rows, dispersion, pass })
}

/// A directory stands for the manifest inside it.
fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("manifest.json")
    } else {
        p.to_path_buf()
    }
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:<40} {:>11} {:>4} {:>11}  source", "status", "check", "measured", "", "tolerance");
        for r in &self.rows {
            let rel = match r.relation {
                Some(Relation::AtMost) => "<=",
                Some(Relation::AtLeast) => ">=",
                None => "",
            };
            let _ = writeln!(
                out,
                "{:<6} {:<40} {:>11} {:>4} {:>11}  {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.check,
                num(r.measured),
                rel,
                num(r.tolerance),
                r.source
            );
        }
        if !self.dispersion.is_empty() {
            let _ = writeln!(out, "\n{:>4} {:>20} {:>20} {:>11}", "k", "measured omega", "omega(k)", "rel err");
            for d in &self.dispersion {
                let _ = writeln!(out, "{:>4} {:>20.12} {:>20.12} {:>11.3e}", d.mode, d.measured, d.exact, d.rel_err);
            }
        }
        let _ = writeln!(out, "\n{}", if self.pass { "all checks pass" } else { "some checks FAIL" });
        out
    }
}
