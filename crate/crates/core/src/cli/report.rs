//! Experiment output: CSV tables, optional field dumps, the JSON summary and
//! the manifest of every written file.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checks::{all_passed, Check};
use crate::error::{Error, Result};
use crate::grid::{dump, GridSpec};

/// A numeric table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        w.write_record(&self.columns).map_err(csv_error)?;
        let mut buf = ryu::Buffer::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| buf.format(*v).to_owned()).collect();
            w.write_record(&cells).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// A field to be written in the binary dump format.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub name: String,
    pub grid: GridSpec,
    pub components: Vec<Vec<f64>>,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub results: serde_json::Value,
    pub tables: Vec<Table>,
    pub dumps: Vec<FieldDump>,
}

impl Report {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self { experiment: experiment.into(), seed, ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// The deterministic JSON summary.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.experiment,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "passed": self.passed(),
            "checks": self.checks,
            "warnings": self.warnings,
            "tables": self.tables.iter().map(|t| serde_json::json!({
                "file": format!("{}.csv", t.name),
                "columns": t.columns,
                "rows": t.rows.len(),
            })).collect::<Vec<_>>(),
            "results": self.results,
        })
    }
}

/// Writes tables, dumps and `summary.json` into `dir` and prints a short
/// human-readable account. Returns the written paths.
pub fn emit_report(report: &mut Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    if report.tables.is_empty() && report.checks.is_empty() {
        report.warnings.push("experiment produced no results".into());
    }
    let mut written = Vec::new();
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.name));
        t.write_csv(&path)?;
        written.push(path);
    }
    for d in &report.dumps {
        let path = dir.join(format!("{}.field", d.name));
        let mut w = BufWriter::new(fs::File::create(&path)?);
        let comps: Vec<&[f64]> = d.components.iter().map(|c| c.as_slice()).collect();
        dump::write_components(&mut w, &d.grid, &comps)?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&report.summary())? + "\n")?;
    written.push(path);

    println!("{}: {}", report.experiment, if report.passed() { "PASS" } else { "FAIL" });
    for c in &report.checks {
        let bound = match (c.lower, c.upper) {
            (Some(l), Some(u)) => format!("in [{l:e}, {u:e}]"),
            (Some(l), None) => format!(">= {l:e}"),
            (None, Some(u)) => format!("<= {u:e}"),
            (None, None) => String::new(),
        };
        println!("  [{}] {} = {:.6e} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.value, bound);
    }
    for w in &report.warnings {
        println!("  warning: {w}");
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hashes each written file; paths are recorded relative to `dir`.
pub fn manifest_entries(dir: &Path, files: &[PathBuf]) -> Result<Vec<ManifestEntry>> {
    files
        .iter()
        .map(|p| {
            let bytes = fs::read(p)?;
            let rel = p.strip_prefix(dir).unwrap_or(p);
            Ok(ManifestEntry { path: rel.display().to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
        })
        .collect()
}
