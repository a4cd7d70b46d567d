//! Tables, summaries and manifests, written atomically into the run directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Self::Num(x) => fmt_f64(*x),
            Self::Int(i) => i.to_string(),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Self::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Self::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Self::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Self::Text(x)
    }
}

/// Seventeen significant digits, enough to recover every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().context("flushing CSV")
    }
}

/// A named pass/fail check recorded in the summary.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Report {
    pub values: Map<String, Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Extra JSON documents, such as full minimizer results.
    pub documents: Vec<(String, Value)>,
    pub messages: Vec<String>,
    /// Set when a minimization hit its iteration cap.
    pub non_converged: bool,
}

impl Report {
    pub fn value(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(key.into(), serde_json::to_value(v).expect("summary values serialize"));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn document(&mut self, name: &str, v: impl Serialize) {
        self.documents.push((name.into(), serde_json::to_value(v).expect("documents serialize")));
    }

    pub fn passed(&self) -> bool {
        !self.non_converged && self.checks.iter().all(|c| c.passed)
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().context("output path has no parent")?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

/// Paths of one run: `<dir>/<command>-<hash>.<stem>.<ext>`.
#[derive(Clone, Debug)]
pub struct RunFiles {
    pub dir: PathBuf,
    pub prefix: String,
}

impl RunFiles {
    pub fn new(dir: &Path, command: &str, hash: &str) -> Self {
        Self { dir: dir.into(), prefix: format!("{command}-{hash}") }
    }

    pub fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{stem}.{ext}", self.prefix))
    }

    pub fn summary(&self) -> PathBuf {
        self.path("summary", "json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.path("manifest", "toml")
    }

    /// Writes the manifest, tables, documents and summary; returns the paths.
    pub fn write(&self, manifest: &str, command: &str, hash: &str, report: &Report) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let mut written = Vec::new();
        let mut put = |path: PathBuf, bytes: &[u8]| -> Result<()> {
            write_atomic(&path, bytes)?;
            written.push(path);
            Ok(())
        };
        put(self.manifest(), manifest.as_bytes())?;
        for t in &report.tables {
            put(self.path(&t.name, "csv"), &t.to_csv()?)?;
        }
        for (name, doc) in &report.documents {
            put(self.path(name, "json"), &serde_json::to_vec_pretty(doc)?)?;
        }
        let summary = serde_json::json!({
            "command": command,
            "hash": hash,
            "passed": report.passed(),
            "non_converged": report.non_converged,
            "checks": report.checks,
            "values": report.values,
            "tables": report.tables.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
        });
        put(self.summary(), &serde_json::to_vec_pretty(&summary)?)?;
        Ok(written)
    }
}
