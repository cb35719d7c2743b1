//! Command-line verification and evaluation runs for `levy-overshoot`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
//! configuration, assumption or sample-size error.

pub mod commands;
pub mod config;
pub mod eval;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{Config, LoadedConfig};
pub use manifest::{Check, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] levy_overshoot::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "levy-overshoot",
    version,
    about = "Passage-law verification runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides `[sim] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overrides `[sim] samples`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Overrides `[sim] tilt`.
    #[arg(long, global = true)]
    pub tilt: Option<f64>,

    /// Significance level of the KS checks.
    #[arg(long, global = true, value_parser = parse_level)]
    pub level: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random-walk identity by exact enumeration, both maximum conventions.
    VerifyRw {
        /// Scales every right-hand value by `1 + REL` (negative control).
        #[arg(long, hide = true)]
        corrupt_rhs: Option<f64>,
    },
    /// Simulated passage quantities against the closed-form finite-level law.
    VerifyPassage,
    /// Limit laws: decomposition, mass accounting, tail equivalence and Monte Carlo convergence.
    VerifyAsymptotic,
    /// Tabulates a law over a coordinate grid.
    Eval,
    /// Exports the renewal measure and ladder jump tail on the grid.
    Ladder,
}

fn parse_level(s: &str) -> Result<f64, String> {
    match s {
        "0.05" => Ok(0.05),
        "0.01" => Ok(0.01),
        _ => Err(format!("level must be 0.05 or 0.01, got {s}")),
    }
}

/// Result of a command before the manifest is written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(m) => {
            for c in &m.checks {
                println!("{}", c.line());
            }
            println!("{}", if m.pass { "PASS" } else { "FAIL" });
            if m.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs a command, writes its outputs and manifest, and returns the manifest.
pub fn execute(cli: &Cli) -> Result<RunManifest, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = LoadedConfig::load(path)?;
    std::fs::create_dir_all(&cli.out)?;
    let (name, outcome) = match &cli.command {
        Command::VerifyRw { corrupt_rhs } => {
            ("verify-rw", commands::verify_rw(&cfg, cli, *corrupt_rhs)?)
        }
        Command::VerifyPassage => ("verify-passage", commands::verify_passage(&cfg, cli)?),
        Command::VerifyAsymptotic => ("verify-asymptotic", commands::verify_asymptotic(&cfg, cli)?),
        Command::Eval => ("eval", eval::run(&cfg, cli)?),
        Command::Ladder => ("ladder", commands::export_ladder(&cfg, cli)?),
    };
    let mut outputs = outcome.outputs.clone();
    if !outcome.checks.is_empty() {
        manifest::write_checks(&cli.out.join("checks.csv"), &outcome.checks)?;
        outputs.push("checks.csv".into());
    }
    let manifest = RunManifest {
        command: name.into(),
        config_sha256: cfg.digest.clone(),
        seed: outcome.seed,
        outputs,
        pass: outcome.pass(),
        checks: outcome.checks,
    };
    manifest.write(&cli.out)?;
    Ok(manifest)
}
