//! Shared fixtures for the acceptance suite: the in-repo model fleet and
//! the one-line verdict format.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

/// `configs/` at the workspace root.
pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn config(name: &str) -> PathBuf {
    configs_dir().join(name)
}

/// Configs whose `[regime]` is checked for mass accounting and consistency.
pub const FLEET_REGIMES: &[&str] = &[
    "tilted_pareto.toml",
    "tilted_pareto_light.toml",
    "synthetic_creeping.toml",
];

/// Index and positivity pairs for the stable normalization check.
#[derive(Debug, Deserialize)]
pub struct StableGrid {
    pub indices: Vec<f64>,
    pub rhos: Vec<f64>,
    pub barrier: f64,
}

impl StableGrid {
    pub fn load() -> Self {
        let text = std::fs::read_to_string(config("stable_grid.toml")).expect("stable grid config");
        toml::from_str(&text).expect("valid stable grid config")
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} [{:.1}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}
