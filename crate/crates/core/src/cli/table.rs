use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Comma-separated table with a schema line and a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = format!("# schema_version={SCHEMA_VERSION}\n").into_bytes();
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingTable(path.to_path_buf()));
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("table has no column `{name}`")))
    }

    pub fn f64_at(&self, row: usize, col: usize) -> Result<f64> {
        self.rows[row][col]
            .parse()
            .map_err(|_| Error::Config(format!("not a number: `{}`", self.rows[row][col])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

/// Record of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    pub schema_version: u32,
    pub seed: u64,
    pub seed_scheme: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputEntry>,
    pub config: toml::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes named files into `dir` and returns their manifest entries.
pub fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<OutputEntry>> {
    fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, bytes)| {
            fs::write(dir.join(name), bytes)?;
            Ok(OutputEntry {
                file: name.clone(),
                sha256: sha256_hex(bytes),
            })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(format!("manifest_{}.toml", manifest.command.replace('-', "_")));
    let text = toml::to_string(manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, text)?;
    Ok(path)
}
