//! Batch evaluation of a named law over a coordinate grid.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};

use levy_overshoot::ladder::{build_ladder_tilted, LadderData};
use levy_overshoot::laws::{pollaczek_khintchine, triple_law_stable, AsymptoticLaws, PassageLaw};
use levy_overshoot::process::{AsymptoticRegime, SpectrallyPositiveBV};
use levy_overshoot::Error;

use crate::config::LoadedConfig;
use crate::{Cli, CliError, Outcome};

/// `(name, coordinates, description)` of every evaluable law.
pub const LAWS: &[(&str, &[&str], &str)] = &[
    (
        "gbar",
        &["u"],
        "limiting conditional overshoot survival function",
    ),
    (
        "large_jump_marginal",
        &["u"],
        "overshoot density of the large-jump limit (defective)",
    ),
    (
        "drift_in_marginal",
        &["u"],
        "overshoot density of the drift-in limit (defective)",
    ),
    (
        "large_jump_law",
        &["u", "v", "y"],
        "large-jump limit density in (u, v, y)",
    ),
    (
        "drift_in_law",
        &["u", "phi", "theta"],
        "drift-in limit density in (u, phi, theta), theta > 0",
    ),
    (
        "last_max_asymptotic",
        &["z"],
        "limiting distribution function of the pre-passage maximum",
    ),
    ("passage_probability", &["x"], "q U(x, inf)"),
    ("renewal_cumulative", &["x"], "U[0, x]"),
    (
        "triple_law_sp",
        &["x", "u", "v", "y"],
        "finite-level triple density, not conditioned",
    ),
    (
        "triple_law_sp_conditional",
        &["x", "u", "v", "y"],
        "finite-level triple density given passage",
    ),
    (
        "overshoot_survival",
        &["x", "u"],
        "finite-level conditional overshoot survival function",
    ),
    (
        "triple_law_stable",
        &["x", "u", "v", "y"],
        "stable triple density",
    ),
];

fn available() -> String {
    LAWS.iter().map(|l| l.0).collect::<Vec<_>>().join(", ")
}

/// Lazily built model objects shared by the law evaluators.
struct Context<'c> {
    cfg: &'c LoadedConfig,
    process: Option<SpectrallyPositiveBV>,
    regime: Option<AsymptoticRegime>,
    ladder: Option<LadderData>,
}

impl<'c> Context<'c> {
    fn new(cfg: &'c LoadedConfig, law: &str) -> Result<Self, CliError> {
        let mut ctx = Self {
            cfg,
            process: None,
            regime: None,
            ladder: None,
        };
        if law == "triple_law_stable" {
            return Ok(ctx);
        }
        let asymptotic = matches!(
            law,
            "gbar"
                | "large_jump_marginal"
                | "drift_in_marginal"
                | "large_jump_law"
                | "drift_in_law"
                | "last_max_asymptotic"
        );
        let alpha = cfg.config.regime.map(|r| r.alpha);
        if asymptotic && alpha.is_none() {
            return Err(CliError::Config(format!(
                "law `{law}` needs a [regime] section"
            )));
        }
        let tilt = alpha.unwrap_or(0.0);
        if cfg.model_kind()? == "synthetic_ladder" {
            ctx.ladder = Some(cfg.synthetic_ladder(tilt)?);
            return Ok(ctx);
        }
        let p = cfg.spectrally_positive()?;
        if asymptotic {
            let r = AsymptoticRegime::new(tilt, p.clone())?;
            ctx.regime = Some(r);
        }
        ctx.ladder = Some(build_ladder_tilted(&p, cfg.grid()?, tilt)?);
        ctx.process = Some(p);
        Ok(ctx)
    }

    fn ladder(&self) -> Result<&LadderData, CliError> {
        self.ladder
            .as_ref()
            .ok_or_else(|| CliError::Config("this law needs ladder data".into()))
    }

    fn process(&self) -> Result<&SpectrallyPositiveBV, CliError> {
        self.process
            .as_ref()
            .ok_or_else(|| CliError::Config("this law needs a spectrally_positive model".into()))
    }

    fn asymptotic(&self) -> Result<AsymptoticLaws<'_>, CliError> {
        let ladder = self.ladder()?;
        Ok(match &self.regime {
            Some(r) => AsymptoticLaws::for_regime(r, ladder)?,
            None => {
                let alpha = self
                    .cfg
                    .config
                    .regime
                    .ok_or_else(|| CliError::Config("missing [regime] section".into()))?
                    .alpha;
                AsymptoticLaws::new(ladder, alpha)?
            }
        })
    }
}

/// Cartesian product of the coordinate values, first coordinate outermost.
fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut rows = vec![Vec::new()];
    for axis in axes {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                axis.iter().map(move |&v| {
                    let mut next = r.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    rows
}

pub fn run(cfg: &LoadedConfig, cli: &Cli) -> Result<Outcome, CliError> {
    let section = cfg
        .config
        .eval
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [eval] section".into()))?;
    let law = section.law.as_str();
    let (_, names, about) = LAWS.iter().find(|l| l.0 == law).ok_or_else(|| {
        CliError::Config(format!(
            "unknown law `{law}`; available laws: {}",
            available()
        ))
    })?;
    for key in section.coords.keys() {
        if !names.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "law `{law}` has coordinates {names:?}; `{key}` is not one of them"
            )));
        }
    }
    let axes = names
        .iter()
        .map(|n| {
            section
                .coords
                .get(*n)
                .ok_or_else(|| CliError::Config(format!("law `{law}` needs coordinate `{n}`")))?
                .values()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = product(&axes);

    let ctx = Context::new(cfg, law)?;
    let mut mass = None;
    let values: Vec<f64> = match law {
        "gbar"
        | "large_jump_marginal"
        | "drift_in_marginal"
        | "large_jump_law"
        | "drift_in_law"
        | "last_max_asymptotic" => {
            let a = ctx.asymptotic()?;
            let m = a.mass_accounting();
            let (jump_mass, drift_mass) = match m {
                Ok(m) => (m.large_jump, m.drift_in),
                Err(Error::MassAccounting {
                    large_jump,
                    drift_in,
                    ..
                }) => (large_jump, drift_in),
                Err(e) => return Err(e.into()),
            };
            match law {
                "large_jump_marginal" | "large_jump_law" => mass = Some(jump_mass),
                "drift_in_marginal" | "drift_in_law" | "last_max_asymptotic" => {
                    mass = Some(drift_mass)
                }
                _ => {}
            }
            rows.iter()
                .map(|r| {
                    Ok(match law {
                        "gbar" => a.gbar(r[0])?,
                        "large_jump_marginal" => a.large_jump_marginal_u(r[0])?,
                        "drift_in_marginal" => a.drift_in_marginal_u(r[0]),
                        "large_jump_law" => a.large_jump_law(r[0], r[1], r[2])?,
                        "drift_in_law" => a.drift_in_law(r[0], r[1], r[2]),
                        _ => a.last_max_asymptotic(r[0]),
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
        "passage_probability" => {
            let l = ctx.ladder()?;
            rows.iter()
                .map(|r| Ok(pollaczek_khintchine(l, r[0])?))
                .collect::<Result<_, CliError>>()?
        }
        "renewal_cumulative" => {
            let l = ctx.ladder()?;
            rows.iter().map(|r| l.u().cumulative(r[0])).collect()
        }
        "triple_law_sp" | "triple_law_sp_conditional" | "overshoot_survival" => {
            let (l, p) = (ctx.ladder()?, ctx.process()?);
            let mut cache: BTreeMap<u64, PassageLaw<'_>> = BTreeMap::new();
            let mut out = Vec::with_capacity(rows.len());
            for r in &rows {
                let key = r[0].to_bits();
                let pl = match cache.entry(key) {
                    std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(PassageLaw::new(l, p, r[0])?)
                    }
                };
                out.push(match law {
                    "triple_law_sp" => pl.density(r[1], r[2], r[3]),
                    "triple_law_sp_conditional" => pl.conditional_density(r[1], r[2], r[3]),
                    _ => pl.overshoot_survival(r[1]),
                });
            }
            if cache.len() == 1 {
                let pl = cache.values().next().expect("one law");
                mass = match law {
                    "triple_law_sp" => Some(pl.passage_probability() * pl.conditional_mass()),
                    "triple_law_sp_conditional" => Some(pl.conditional_mass()),
                    _ => None,
                };
            }
            out
        }
        _ => {
            let s = cfg.stable()?;
            rows.iter()
                .map(|r| triple_law_stable(&s, r[0], r[1], r[2], r[3]))
                .collect()
        }
    };

    let file = format!("eval_{law}.csv");
    let mut f = BufWriter::new(File::create(cli.out.join(&file))?);
    writeln!(f, "# law={law}: {about}")?;
    if let Some(m) = mass {
        writeln!(f, "# mass={m}")?;
    }
    let mut w = csv::Writer::from_writer(f);
    let mut header: Vec<&str> = names.to_vec();
    header.push("value");
    w.write_record(&header).map_err(Error::from)?;
    for (r, v) in rows.iter().zip(&values) {
        let mut rec: Vec<String> = r.iter().map(|c| c.to_string()).collect();
        rec.push(v.to_string());
        w.write_record(&rec).map_err(Error::from)?;
    }
    w.flush()?;
    Ok(Outcome {
        seed: None,
        outputs: vec![file],
        checks: Vec::new(),
    })
}
