use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One reported comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance region, e.g. `≤ 1e-12` or `[0.18, 0.19]`.
    pub accept: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            accept: format!("≤ {bound:e}"),
            pass: value <= bound,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            accept: format!("[{lo}, {hi}]"),
            pass: value >= lo && value <= hi,
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, accept: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            accept: accept.into(),
            pass,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} (accept {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.accept
        )
    }
}

/// What a run read, wrote and concluded. Contains no timestamps, so equal
/// inputs give byte-identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let f = File::create(dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(BufWriter::new(f), self)?;
        Ok(())
    }
}

/// Writes `check,value,accept,pass` rows.
pub fn write_checks(path: &Path, checks: &[Check]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(levy_overshoot::Error::from)?;
    w.write_record(["check", "value", "accept", "pass"])
        .map_err(levy_overshoot::Error::from)?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.value.to_string(),
            c.accept.clone(),
            c.pass.to_string(),
        ])
        .map_err(levy_overshoot::Error::from)?;
    }
    w.flush()?;
    Ok(())
}
