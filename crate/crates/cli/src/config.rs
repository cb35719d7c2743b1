//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "spectrally_positive"   # two_sided | stable | synthetic_ladder
//! drift = 2.0
//!
//! [model.jumps]
//! family = "exponential"         # tilted_pareto | tabulated
//! rate = 1.0
//! decay = 1.0
//!
//! [grid]
//! step = 0.0009765625
//! length = 48.0
//!
//! [sim]
//! barrier = 2.0
//! samples = 100000
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use levy_overshoot::ladder::{GridSpec, LadderData};
use levy_overshoot::measures::{JumpMeasure, TabulatedLaw};
use levy_overshoot::process::{SpectrallyPositiveBV, StableSpec, TwoSidedCPP};
use levy_overshoot::rw_oracle::LatticeStep;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<ModelConfig>,
    pub grid: Option<GridConfig>,
    pub regime: Option<RegimeConfig>,
    pub sim: Option<SimSection>,
    pub verify: Option<VerifySection>,
    pub lattice: Option<LatticeSection>,
    pub eval: Option<EvalSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: String,
    /// Downward drift `c` for `spectrally_positive`, signed drift for `two_sided`.
    pub drift: Option<f64>,
    pub jumps: Option<JumpConfig>,
    pub down_jumps: Option<JumpConfig>,
    pub index: Option<f64>,
    pub rho: Option<f64>,
    pub cplus: Option<f64>,
    pub cminus: Option<f64>,
    /// Killing rate and drift of a synthetic ascending ladder process.
    pub q: Option<f64>,
    pub drift_h: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub family: String,
    pub rate: Option<f64>,
    pub decay: Option<f64>,
    pub power: Option<f64>,
    /// CSV of `(y, density)` knots, relative to the config file.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub step: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub barrier: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_miss_epsilon")]
    pub miss_epsilon: f64,
    #[serde(default)]
    pub tilt: f64,
}

fn default_samples() -> usize {
    100_000
}

fn default_miss_epsilon() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub x_ladder: Vec<f64>,
    #[serde(default = "default_min_n_effective")]
    pub min_n_effective: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            level: default_level(),
            x_ladder: Vec::new(),
            min_n_effective: default_min_n_effective(),
        }
    }
}

fn default_level() -> f64 {
    0.01
}

fn default_min_n_effective() -> f64 {
    100.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    #[serde(default = "default_x_max")]
    pub x_max: i64,
    #[serde(default = "default_depth")]
    pub i_max: usize,
    #[serde(default = "default_depth")]
    pub j_max: usize,
    pub laws: Vec<LatticeLawConfig>,
}

fn default_x_max() -> i64 {
    5
}

fn default_depth() -> usize {
    6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeLawConfig {
    pub name: Option<String>,
    pub support: Vec<i64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub law: String,
    #[serde(default)]
    pub coords: BTreeMap<String, Coord>,
}

/// A coordinate held fixed, listed, or swept over an arithmetic range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Fixed(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Coord {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Coord::Fixed(v) => Ok(vec![*v]),
            Coord::List(v) => Ok(v.clone()),
            Coord::Range { start, stop, step } => {
                if step.is_nan() || *step <= 0.0 || start.is_nan() || stop.is_nan() || stop < start
                {
                    return Err(CliError::Config(format!(
                        "range needs step > 0 and stop ≥ start, got {start}..{stop} by {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

/// A parsed configuration with its raw bytes and location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub digest: String,
    pub dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
        let config: Config = toml::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(Self {
            config,
            digest: crate::manifest::sha256_hex(&bytes),
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn model(&self) -> Result<&ModelConfig, CliError> {
        self.config.model.as_ref().ok_or_else(|| missing("model"))
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let g = self.config.grid.ok_or_else(|| missing("grid"))?;
        Ok(GridSpec::new(g.step, g.length)?)
    }

    pub fn regime(&self) -> Result<RegimeConfig, CliError> {
        self.config.regime.ok_or_else(|| missing("regime"))
    }

    pub fn sim(&self) -> Result<&SimSection, CliError> {
        self.config.sim.as_ref().ok_or_else(|| missing("sim"))
    }

    pub fn verify(&self) -> VerifySection {
        self.config.verify.clone().unwrap_or_default()
    }

    pub fn lattice(&self) -> Result<&LatticeSection, CliError> {
        self.config
            .lattice
            .as_ref()
            .ok_or_else(|| missing("lattice"))
    }

    pub fn jumps(&self, j: &JumpConfig) -> Result<JumpMeasure, CliError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("jump family {} needs `{name}`", j.family)))
        };
        let m = match j.family.as_str() {
            "exponential" => {
                JumpMeasure::exponential(need(j.rate, "rate")?, need(j.decay, "decay")?)?
            }
            "tilted_pareto" => JumpMeasure::tilted_pareto(
                need(j.rate, "rate")?,
                need(j.decay, "decay")?,
                need(j.power, "power")?,
            )?,
            "tabulated" => {
                let rel = j
                    .path
                    .as_ref()
                    .ok_or_else(|| CliError::Config("jump family tabulated needs `path`".into()))?;
                let path = self.dir.join(rel);
                let file = File::open(&path).map_err(|source| CliError::Read {
                    path: path.clone(),
                    source,
                })?;
                let (knots, dens) = TabulatedLaw::read_csv(file)?;
                JumpMeasure::tabulated(j.rate, knots, dens)?
            }
            other => {
                return Err(CliError::Config(format!(
                "unknown jump family `{other}`; expected exponential, tilted_pareto or tabulated"
            )))
            }
        };
        Ok(m)
    }

    pub fn model_kind(&self) -> Result<&str, CliError> {
        let kind = self.model()?.kind.as_str();
        match kind {
            "spectrally_positive" | "two_sided" | "stable" | "synthetic_ladder" => Ok(kind),
            "general" | "levy_triplet" | "brownian" | "gaussian" => Err(CliError::Config(format!(
                "model kind `{kind}` is not representable: only compound Poisson jumps with drift \
                 (spectrally_positive, two_sided), stable processes and synthetic ladder data are supported"
            ))),
            other => Err(CliError::Config(format!(
                "unknown model kind `{other}`; expected spectrally_positive, two_sided, stable or synthetic_ladder"
            ))),
        }
    }

    pub fn spectrally_positive(&self) -> Result<SpectrallyPositiveBV, CliError> {
        let m = self.model()?;
        if self.model_kind()? != "spectrally_positive" {
            return Err(CliError::Config(format!(
                "this command needs a spectrally_positive model, got `{}`",
                m.kind
            )));
        }
        let c = m
            .drift
            .ok_or_else(|| CliError::Config("model needs `drift`".into()))?;
        let j = m.jumps.as_ref().ok_or_else(|| missing("model.jumps"))?;
        Ok(SpectrallyPositiveBV::new(c, self.jumps(j)?)?)
    }

    pub fn two_sided(&self) -> Result<TwoSidedCPP, CliError> {
        let m = self.model()?;
        let drift = m
            .drift
            .ok_or_else(|| CliError::Config("model needs `drift`".into()))?;
        let up = m.jumps.as_ref().ok_or_else(|| missing("model.jumps"))?;
        let down = m
            .down_jumps
            .as_ref()
            .ok_or_else(|| missing("model.down_jumps"))?;
        Ok(TwoSidedCPP::new(drift, self.jumps(up)?, self.jumps(down)?)?)
    }

    pub fn stable(&self) -> Result<StableSpec, CliError> {
        let m = self.model()?;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("stable model needs `{name}`")))
        };
        Ok(StableSpec::new(
            need(m.index, "index")?,
            need(m.rho, "rho")?,
            m.cplus.unwrap_or(1.0),
            m.cminus.unwrap_or(1.0),
        )?)
    }

    /// Ladder data given directly by `q`, `d_H` and `Π_H`.
    pub fn synthetic_ladder(&self, tilt: f64) -> Result<LadderData, CliError> {
        let m = self.model()?;
        let q =
            m.q.ok_or_else(|| CliError::Config("synthetic_ladder needs `q`".into()))?;
        let d = m.drift_h.unwrap_or(0.0);
        let j = m.jumps.as_ref().ok_or_else(|| missing("model.jumps"))?;
        Ok(LadderData::synthetic(
            q,
            d,
            self.jumps(j)?,
            self.grid()?,
            tilt,
        )?)
    }

    pub fn lattice_steps(&self) -> Result<Vec<(String, LatticeStep)>, CliError> {
        let lat = self.lattice()?;
        if lat.laws.is_empty() {
            return Err(CliError::Config("[lattice] lists no laws".into()));
        }
        lat.laws
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let name = l.name.clone().unwrap_or_else(|| format!("law{k}"));
                let step = LatticeStep::new(l.support.clone(), l.probs.clone())
                    .map_err(|e| CliError::Config(format!("lattice law `{name}`: {e}")))?;
                Ok((name, step))
            })
            .collect()
    }
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("missing [{section}] section"))
}
