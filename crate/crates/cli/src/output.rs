//! Tabular artifacts and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A table of rendered cells. Numbers are rendered with Rust's shortest
/// round-trip formatting.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects; cells that parse as numbers are emitted as numbers.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                self.header
                    .iter()
                    .zip(r)
                    .map(|(h, c)| {
                        let v = match c.parse::<f64>() {
                            Ok(x) if x.is_finite() => serde_json::Number::from_f64(x).map_or(serde_json::Value::String(c.clone()), serde_json::Value::Number),
                            _ => serde_json::Value::String(c.clone()),
                        };
                        (h.clone(), v)
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("table serializes") + "\n"
    }
}

/// Renders one cell.
pub fn cell(x: impl Display) -> String {
    x.to_string()
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub code_version: &'static str,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub budget_used: BTreeMap<String, u64>,
    pub partial: bool,
    pub outputs: Vec<OutputFile>,
}

/// Collects artifacts for one run and writes the manifest last.
pub struct Run {
    dir: PathBuf,
    format: Format,
    started: Instant,
    outputs: Vec<OutputFile>,
    pub budget_used: BTreeMap<String, u64>,
    pub partial: bool,
}

impl Run {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            started: Instant::now(),
            outputs: Vec::new(),
            budget_used: BTreeMap::new(),
            partial: false,
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.outputs.push(OutputFile { name: name.to_string(), sha256: hex::encode(Sha256::digest(text.as_bytes())) });
        Ok(())
    }

    /// Writes `stem.csv` or `stem.json` depending on the run format.
    pub fn write_table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self.write_text(&format!("{stem}.csv"), &table.to_csv()),
            Format::Json => self.write_text(&format!("{stem}.json"), &table.to_json()),
        }
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        self.write_text(name, &text)
    }

    pub fn finish(self, subcommand: &str, config_hash: String, seed: u64) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config_hash,
            code_version: env!("CARGO_PKG_VERSION"),
            seed,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            budget_used: self.budget_used,
            partial: self.partial,
            outputs: self.outputs,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}
