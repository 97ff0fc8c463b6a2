use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Bumped whenever a CSV header changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip decimal. Plain notation in the everyday range,
/// exponent notation for the huge values of long horizons.
pub fn num(x: f64) -> String {
    if x == 0.0 || x.is_nan() || x.is_infinite() || (1e-6..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn error_marker(e: &anyhow::Error) -> String {
    format!("error: {e:#}")
}

/// A result table with a fixed header.
#[derive(Debug, Clone)]
pub struct Table {
    /// File stem, e.g. `values` for `values.csv`.
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Self {
            name,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().flatten().any(|c| c.starts_with("error:"))
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    /// Array of row objects; numeric cells become JSON numbers.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| ((*k).to_string(), cell(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows)?;
        out.push(b'\n');
        Ok(out)
    }
}

fn cell(v: &str) -> Value {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => serde_json::Number::from_f64(x).map_or_else(|| Value::String(v.into()), Value::Number),
        _ if v == "true" || v == "false" => Value::Bool(v == "true"),
        _ => Value::String(v.into()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so a
/// partially written file never carries the final name.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputRecord> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    let target: PathBuf = dir.join(name);
    tmp.persist(&target)
        .with_context(|| format!("renaming into {}", target.display()))?;
    Ok(OutputRecord {
        file: name.to_string(),
        bytes: bytes.len(),
        sha256: sha256_hex(bytes),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    pub outputs: Vec<OutputRecord>,
}

pub fn unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}
