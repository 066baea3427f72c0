//! Flat `key = value` experiment configuration with dotted keys.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Every key the workbench understands, with its default.
const DEFAULTS: &[(&str, &str)] = &[
    ("experiment", "default"),
    ("seed", "1"),
    ("out", "out"),
    ("tol", "1e-10"),
    ("model.kind", "genus2"),
    ("model.c", "1"),
    ("model.w", "0.5"),
    ("model.s", "0.5"),
    ("flow.start", "0.1,1.2,0.4"),
    ("flow.T", "10"),
    ("flow.dt", "0.1"),
    ("jacobi.samples", "20"),
    ("jacobi.T", "20"),
    ("busemann.grid", "5"),
    ("busemann.T", "20"),
    ("strips.samples", "50"),
    ("strips.step", "0.001"),
    ("strips.horizon", "20"),
    ("strips.bound", "1"),
    ("quotient.samples", "20"),
    ("quotient.eps", "0.2"),
    ("quotient.step", "0.01"),
    ("shadow.skeletons", "5"),
    ("shadow.segments", "5"),
    ("shadow.a", "2"),
    ("shadow.deltas", "0.08,0.04,0.02"),
    ("periodic.T", "8"),
    ("periodic.T_grid", "4,5,6,7,8"),
    ("entropy.T_grid", "2,4,6"),
    ("entropy.eps", "0.1,0.2"),
    ("entropy.step", "1"),
    ("entropy.sampler", "arc"),
    ("entropy.count", "1000"),
    ("entropy.arc", "0.1"),
    ("mme.T_grid", "5,6,7,8"),
    ("mme.window", "0.5"),
    ("mme.cells", "250000"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { entries: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.entries.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key '{key}'"))),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.f64("tol")? > 0.0) {
            return Err(CliError::Config("tol must be positive".into()));
        }
        self.u64("seed")?;
        Ok(())
    }

    pub fn str(&self, key: &str) -> &str {
        self.entries.get(key).map(String::as_str).unwrap_or_else(|| panic!("no default for {key}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v = self.str(key);
        v.parse().map_err(|_| CliError::Config(format!("{key}: '{v}' is not a number")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let v = self.str(key);
        v.parse().map_err(|_| CliError::Config(format!("{key}: '{v}' is not a non-negative integer")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.u64(key)? as usize)
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.str(key)
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("{key}: '{s}' is not a number"))))
            .collect()
    }

    /// The model section in the core's model-spec syntax.
    pub fn model_spec(&self) -> String {
        ["kind", "c", "w", "s"].iter().map(|k| format!("{k} = {}\n", self.str(&format!("model.{k}")))).collect()
    }

    /// Canonical text: one `key = value` line per key, sorted.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the canonical text; independent of key order in the source file.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}
