//! Tabular results and their serialized forms.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Serialization of result tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Shortest decimal text that parses back to exactly `x`.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Real(v) => format_real(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Real(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

/// A named table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<String>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width must match header of {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| serde_json::Value::Array(row.iter().map(Cell::json).collect()))
            .collect();
        let v = serde_json::json!({ "name": self.name, "columns": self.header, "rows": rows });
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Everything an experiment produces, before it is written anywhere.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    /// The first table is the primary result, printed when no output
    /// directory is given.
    pub tables: Vec<Table>,
    /// Extra files as `(file name, contents)`.
    pub files: Vec<(String, String)>,
    /// SVG documents as `(file stem, contents)`.
    pub plots: Vec<(String, String)>,
    /// Scalar results echoed in the manifest.
    pub summary: serde_json::Map<String, serde_json::Value>,
}

/// Run record written next to the results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// The full experiment description; re-running it reproduces every table.
    pub spec: serde_json::Value,
    pub outputs: Vec<String>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub wall_time_seconds: f64,
}

/// Writes tables, extra files, plots (when `plots` is set) and the manifest to
/// `dir`; returns the paths written, manifest last.
pub fn write_artifacts(
    dir: &Path,
    artifacts: &Artifacts,
    format: Format,
    plots: bool,
    mut manifest: Manifest,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: &str| -> Result<()> {
        let path = dir.join(&name);
        fs::write(&path, contents)?;
        manifest.outputs.push(name);
        written.push(path);
        Ok(())
    };
    for t in &artifacts.tables {
        put(format!("{}.{}", t.name, format.extension()), &t.render(format)?)?;
    }
    for (name, contents) in &artifacts.files {
        put(name.clone(), contents)?;
    }
    if plots {
        for (stem, svg) in &artifacts.plots {
            put(format!("{stem}.svg"), svg)?;
        }
    }
    manifest.summary = artifacts.summary.clone();
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}
