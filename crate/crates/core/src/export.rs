//! CSV datasets and their JSON manifest sidecars.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ScalingFit, ScanTable};
use crate::error::{Error, Result};

pub const SCAN_HEADER: &str = "x,q,eta,beta,F_Q,F_C,delta_qc,err,method_q,method_c";

/// Twelve significant digits in scientific notation.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn scan_csv(table: &ScanTable) -> String {
    let with_ratio = table.rows.iter().any(|r| r.ratio.is_some());
    let mut out = String::from(SCAN_HEADER);
    if with_ratio {
        out.push_str(",ratio");
    }
    out.push('\n');
    for r in &table.rows {
        let p = &r.point;
        let fields = [p.x, p.q, p.eta, p.beta, r.f_q.value, r.f_c.value, r.delta_qc, r.err];
        let nums: Vec<String> = fields.iter().map(|v| fmt_value(*v)).collect();
        let _ = write!(out, "{},{},{}", nums.join(","), r.f_q.method.tag(), r.f_c.method.tag());
        if with_ratio {
            let _ = write!(out, ",{}", r.ratio.map(fmt_value).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

/// One parsed line of a scan CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub x: f64,
    pub q: f64,
    pub eta: f64,
    pub beta: f64,
    pub f_q: f64,
    pub f_c: f64,
    pub delta_qc: f64,
    pub err: f64,
}

pub fn parse_scan_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.starts_with(SCAN_HEADER) => {}
        _ => return Err(Error::InvalidParams("not a scan CSV: header mismatch".into())),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 10 {
                return Err(Error::InvalidParams(format!("row {} has {} columns", i + 1, cols.len())));
            }
            let num = |k: usize| {
                cols[k].trim().parse::<f64>().map_err(|e| Error::InvalidParams(format!("row {}, column {}: {e}", i + 1, k + 1)))
            };
            Ok(CsvRow {
                x: num(0)?,
                q: num(1)?,
                eta: num(2)?,
                beta: num(3)?,
                f_q: num(4)?,
                f_c: num(5)?,
                delta_qc: num(6)?,
                err: num(7)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowTag {
    pub method_q: String,
    pub method_c: String,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub parameters: serde_json::Value,
    pub tolerances: serde_json::Value,
    pub version: String,
    pub wall_time_s: f64,
    pub rows: Vec<RowTag>,
    #[serde(default)]
    pub fits: Vec<ScalingFit>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, parameters: serde_json::Value, eps: f64) -> Self {
        RunManifest {
            command,
            parameters,
            tolerances: serde_json::json!({ "eps": eps }),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            rows: Vec::new(),
            fits: Vec::new(),
        }
    }

    pub fn tag_rows(&mut self, table: &ScanTable) {
        self.rows = table
            .rows
            .iter()
            .map(|r| RowTag { method_q: r.f_q.method.tag().into(), method_c: r.f_c.method.tag().into(), converged: true })
            .collect();
    }
}

/// `dir/name.csv` → `dir/name.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_dataset(csv_path: &Path, contents: &str, manifest: &RunManifest) -> Result<()> {
    if let Some(dir) = csv_path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    fs::write(csv_path, contents).map_err(io_err)?;
    write_manifest(&manifest_path(csv_path), manifest)
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::InvalidParams(e.to_string()))?;
    fs::write(path, json + "\n").map_err(io_err)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{scan, Route, ScanPoint};

    fn table() -> ScanTable {
        let pts: Vec<ScanPoint> = [0.3, 0.5].iter().map(|&q| ScanPoint::dimensionless(100.0, q, 1.0, 2.0)).collect();
        scan(&pts, Route::ClosedForm, 1e-10).unwrap()
    }

    #[test]
    fn value_format() {
        assert_eq!(fmt_value(1.0), "1.00000000000e0");
        assert_eq!(fmt_value(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn csv_round_trip() {
        let t = table();
        let text = scan_csv(&t);
        assert!(text.starts_with(&format!("{SCAN_HEADER}\n")));
        assert!(!text.contains('\r'));
        let rows = parse_scan_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[1].delta_qc - t.rows[1].delta_qc).abs() <= 1e-11 * t.rows[1].delta_qc.abs());
        assert!(parse_scan_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn manifest_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("fig.csv");
        let mut m = RunManifest::new(vec!["scan".into()], serde_json::json!({"x": 100}), 1e-10);
        m.tag_rows(&table());
        write_dataset(&csv, &scan_csv(&table()), &m).unwrap();
        let back = read_manifest(&dir.path().join("fig.manifest.json")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.rows[0].method_q, "closed_form");
    }
}
