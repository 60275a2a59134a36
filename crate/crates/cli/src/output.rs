//! CSV and JSON writers sharing one tabular layout.
//!
//! CSV files start with `#` lines: the version and config hash, then
//! `key = value` metadata, then a header row. JSON files hold one object
//! with `config`, `results` and `diagnostics`.

use crate::config::{Format, RunConfig};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(x) => Value::String(fmt_f64(*x)),
            Cell::I(i) => json!(i),
            Cell::B(b) => json!(b),
            Cell::S(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { name: name.into(), columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &'static str, v: impl Into<Cell>) {
        self.meta.push((key, v.into()));
    }
}

/// Hex SHA-256 of the config's canonical JSON form.
pub fn config_hash(cfg: &RunConfig) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write(table: &Table, cfg: &RunConfig, dir: &Path) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let hash = config_hash(cfg);
    let version = twocenter::VERSION;
    match cfg.format {
        Format::Csv => {
            let path = dir.join(format!("{}.csv", table.name));
            let mut buf = Vec::new();
            writeln!(buf, "# twocenter {version} config-sha256={hash}")?;
            for (k, v) in &table.meta {
                writeln!(buf, "# {k} = {}", v.text())?;
            }
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&table.columns)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                w.flush()?;
            }
            std::fs::write(&path, buf)?;
            Ok(path)
        }
        Format::Json => {
            let path = dir.join(format!("{}.json", table.name));
            let results: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> = table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(m)
                })
                .collect();
            let diagnostics: Map<String, Value> = table.meta.iter().map(|(k, v)| (k.to_string(), v.json())).collect();
            let doc = json!({
                "config": { "version": version, "sha256": hash, "values": cfg },
                "results": results,
                "diagnostics": diagnostics,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
            text.push('\n');
            std::fs::write(&path, text)?;
            Ok(path)
        }
    }
}
