//! Files written by every run: CSV tables, summary.json, manifest.toml
//! and plot.py.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::Value as Json;

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join(self.file_name());
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_value(*v)))?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Shortest representation that round-trips.
fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:e}")
    }
}

/// A pass/fail statement with the numbers behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: tolerance.into(),
            pass,
        }
    }

    fn to_json(&self) -> Json {
        serde_json::json!({
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "pass": self.pass,
        })
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub results: serde_json::Map<String, Json>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn result(&mut self, key: &str, value: impl Into<Json>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }
}

pub struct RunInfo<'a> {
    pub experiment: &'a str,
    pub params: toml::Table,
    pub plot_script: &'a str,
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn manifest(info: &RunInfo<'_>, files: &[String], status: &str) -> anyhow::Result<String> {
    let mut doc = toml::Table::new();
    doc.insert("experiment".into(), info.experiment.into());
    doc.insert("tool".into(), env!("CARGO_PKG_NAME").into());
    doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    doc.insert("status".into(), status.into());
    doc.insert(
        "outputs".into(),
        toml::Value::Array(files.iter().map(|f| f.as_str().into()).collect()),
    );
    doc.insert("params".into(), toml::Value::Table(info.params.clone()));
    Ok(toml::to_string(&doc)?)
}

fn summary(info: &RunInfo<'_>, status: &str, body: serde_json::Map<String, Json>) -> String {
    let mut root = serde_json::Map::new();
    root.insert("experiment".into(), info.experiment.into());
    root.insert("status".into(), status.into());
    root.extend(body);
    let mut text = serde_json::to_string_pretty(&Json::Object(root)).expect("summary serialises");
    text.push('\n');
    text
}

/// Write tables, summary, manifest and plot script into `dir`.
pub fn write_outcome(dir: &Path, info: &RunInfo<'_>, outcome: &Outcome) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = Vec::new();
    for table in &outcome.tables {
        table.write(dir)?;
        files.push(table.file_name());
    }
    let mut body = serde_json::Map::new();
    body.insert("results".into(), Json::Object(outcome.results.clone()));
    body.insert(
        "checks".into(),
        Json::Array(outcome.checks.iter().map(Check::to_json).collect()),
    );
    body.insert("all_checks_pass".into(), outcome.checks.iter().all(|c| c.pass).into());
    write_text(&dir.join("summary.json"), &summary(info, "ok", body))?;
    write_text(&dir.join("plot.py"), info.plot_script)?;
    files.extend(["summary.json".to_string(), "plot.py".to_string()]);
    write_text(&dir.join("manifest.toml"), &manifest(info, &files, "ok")?)?;
    Ok(())
}

/// Record a failed run: summary with the error name, plus the manifest.
pub fn write_failure(dir: &Path, info: &RunInfo<'_>, error: &str, message: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut body = serde_json::Map::new();
    body.insert("error".into(), error.into());
    body.insert("message".into(), message.into());
    write_text(&dir.join("summary.json"), &summary(info, "error", body))?;
    write_text(
        &dir.join("manifest.toml"),
        &manifest(info, &["summary.json".to_string()], "error")?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_value(f64::NAN), "nan");
    }

    #[test]
    fn tables_write_headers_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", &["x", "y"]);
        t.push(vec![1.0, 2.0]);
        t.push(vec![0.5, f64::INFINITY]);
        t.write(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("demo.csv")).unwrap();
        assert_eq!(text, "x,y\n1e0,2e0\n5e-1,inf\n");
    }
}
