use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;

use levy_overshoot::ladder::{build_ladder, build_ladder_tilted};
use levy_overshoot::laws::{AsymptoticLaws, PassageLaw};
use levy_overshoot::measures::JumpFamily;
use levy_overshoot::process::AsymptoticRegime;
use levy_overshoot::rw_oracle::{
    enumerate_lhs, passage_law_by_sweep, verify_identity_with, Bounds, Corruption, Variant,
};
use levy_overshoot::simulate::{
    passage_estimate, passages, write_samples_csv, LadderComeback, Outcome as PathOutcome,
    PassageSimulator, SimConfig,
};
use levy_overshoot::stats::{
    ks_distance, ks_distance_with_left, normal_interval, wilson_interval, EmpiricalDist,
};
use levy_overshoot::Error;

use crate::config::LoadedConfig;
use crate::manifest::{sha256_hex, Check};
use crate::{Cli, CliError, Outcome};

/// `z` of the two-sided intervals around passage frequencies.
const INTERVAL_Z: f64 = 3.0;

pub fn verify_rw(cfg: &LoadedConfig, cli: &Cli, corrupt: Option<f64>) -> Result<Outcome, CliError> {
    let lat = cfg.lattice()?;
    let steps = cfg.lattice_steps()?;
    if lat.x_max < 0 {
        return Err(CliError::Config(format!(
            "x_max must be ≥ 0, got {}",
            lat.x_max
        )));
    }
    let corruption = Corruption {
        relative: corrupt.unwrap_or(0.0),
    };
    let path = cli.out.join("rw_report.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    w.write_record([
        "law", "x", "variant", "i", "j", "u", "v", "y", "lhs", "rhs", "abs_err",
    ])
    .map_err(Error::from)?;
    let mut checks = Vec::new();
    for (name, step) in &steps {
        for variant in [Variant::LastMax, Variant::FirstMax] {
            let mut worst: f64 = 0.0;
            for x in 0..=lat.x_max {
                let b = Bounds::new(x, lat.i_max, lat.j_max)?;
                let report = verify_identity_with(step, b, variant, corruption)?;
                worst = worst.max(report.max_error);
                let tag = format!("{variant:?}");
                for r in &report.rows {
                    let (i, j, u, v, y) = r.tuple;
                    w.write_record([
                        name.clone(),
                        x.to_string(),
                        tag.clone(),
                        i.to_string(),
                        j.to_string(),
                        u.to_string(),
                        v.to_string(),
                        y.to_string(),
                        format!("{:e}", r.lhs),
                        format!("{:e}", r.rhs),
                        format!("{:e}", r.abs_err),
                    ])
                    .map_err(Error::from)?;
                }
            }
            checks.push(Check::at_most(
                format!("identity {name} {variant:?}"),
                worst,
                1e-12,
            ));
        }
        // Marginal in (i + j + 1, u) against a forward sweep of the killed walk,
        // over horizons where every (i, j) split is enumerated.
        let horizon = lat.i_max.min(lat.j_max) + 1;
        let mut worst: f64 = 0.0;
        for x in 0..=lat.x_max {
            let b = Bounds::new(x, lat.i_max, lat.j_max)?;
            let lhs = enumerate_lhs(step, b, Variant::LastMax)?;
            let mut marginal: BTreeMap<(usize, i64), f64> = BTreeMap::new();
            for (&(i, j, u, _, _), &p) in &lhs {
                if i + j < horizon {
                    *marginal.entry((i + j + 1, u)).or_insert(0.0) += p;
                }
            }
            let sweep = passage_law_by_sweep(step, x, horizon);
            for key in marginal.keys().chain(sweep.keys()) {
                let a = marginal.get(key).copied().unwrap_or(0.0);
                let s = sweep.get(key).copied().unwrap_or(0.0);
                worst = worst.max((a - s).abs());
            }
        }
        checks.push(Check::at_most(
            format!("sweep marginal {name}"),
            worst,
            1e-12,
        ));
    }
    w.flush()?;
    Ok(Outcome {
        seed: None,
        outputs: vec!["rw_report.csv".into()],
        checks,
    })
}

fn sim_config(cfg: &LoadedConfig, cli: &Cli, barrier: Option<f64>) -> Result<SimConfig, CliError> {
    let s = cfg.sim()?;
    Ok(SimConfig::new(
        cli.seed.unwrap_or(s.seed),
        cli.samples.unwrap_or(s.samples),
        barrier.unwrap_or(s.barrier),
        s.miss_epsilon,
        cli.tilt.unwrap_or(s.tilt),
    )?)
}

fn model_hash(cfg: &LoadedConfig) -> Result<String, CliError> {
    let text = serde_json::to_vec(&(&cfg.config.model, &cfg.config.grid))?;
    Ok(sha256_hex(&text))
}

/// Weighted samples of one coordinate, refused below the configured `n_eff`.
fn empirical(values: Vec<f64>, weights: &[f64], min_n: f64) -> Result<EmpiricalDist, CliError> {
    let e = EmpiricalDist::new(&values, weights)?;
    if e.n_effective().is_nan() || e.n_effective() < min_n {
        return Err(Error::InsufficientSamples {
            n_effective: e.n_effective(),
            required: min_n,
        }
        .into());
    }
    Ok(e)
}

fn ks_check<F: Fn(f64) -> f64>(
    name: &str,
    e: &EmpiricalDist,
    cdf: F,
    level: f64,
) -> Result<Check, CliError> {
    let ks = ks_distance(e, cdf)?;
    Ok(Check::at_most(name, ks.statistic, ks.critical(level)))
}

/// Interval check of a passage probability against a simulated frequency.
fn passage_check(
    name: &str,
    outcomes: &[PathOutcome],
    tilt: f64,
    target: f64,
) -> Result<Check, CliError> {
    let (lo, hi) = if tilt == 0.0 {
        let hits = passages(outcomes).len() as f64;
        wilson_interval(hits, outcomes.len() as f64, INTERVAL_Z)?
    } else {
        let (mean, se) = passage_estimate(outcomes);
        normal_interval(mean, se, INTERVAL_Z)
    };
    Ok(Check::within(name, target, lo, hi))
}

pub fn verify_passage(cfg: &LoadedConfig, cli: &Cli) -> Result<Outcome, CliError> {
    let p = cfg.spectrally_positive()?;
    let sc = sim_config(cfg, cli, None)?;
    let verify = cfg.verify();
    let level = cli.level.unwrap_or(verify.level);
    let ladder = build_ladder(&p, cfg.grid()?)?;
    let law = PassageLaw::new(&ladder, &p, sc.barrier)?;
    let simulator = PassageSimulator::spectrally_positive(&p, sc.tilt)?;
    let comeback = LadderComeback::new(&ladder, sc.miss_epsilon)?;
    let outcomes = simulator.run(&sc, &comeback)?;

    let file = BufWriter::new(File::create(cli.out.join("samples.csv"))?);
    write_samples_csv(file, &outcomes, sc.seed, &model_hash(cfg)?, sc.miss_epsilon)?;

    let mut checks = vec![passage_check(
        "passage probability q U(x, inf)",
        &outcomes,
        sc.tilt,
        law.passage_probability(),
    )?];
    let ps = passages(&outcomes);
    let weights: Vec<f64> = ps.iter().map(|s| s.weight).collect();
    let min_n = verify.min_n_effective;
    let mass = law.conditional_mass();
    let u = empirical(ps.iter().map(|s| s.overshoot).collect(), &weights, min_n)?;
    let v = empirical(ps.iter().map(|s| s.undershoot).collect(), &weights, min_n)?;
    let y = empirical(
        ps.iter().map(|s| s.lastmax_undershoot).collect(),
        &weights,
        min_n,
    )?;
    checks.push(ks_check(
        "ks overshoot",
        &u,
        |w| law.overshoot_cdf(w) / mass,
        level,
    )?);
    checks.push(ks_check(
        "ks undershoot",
        &v,
        |t| law.undershoot_cdf(t) / mass,
        level,
    )?);
    let ks = ks_distance_with_left(
        &y,
        |t| law.last_max_cdf(t) / mass,
        |t| law.last_max_cdf_left(t) / mass,
    )?;
    checks.push(Check::at_most(
        "ks last-max undershoot",
        ks.statistic,
        ks.critical(level),
    ));
    if let JumpFamily::Exponential { decay } = p.jumps().family() {
        let mu = *decay;
        checks.push(ks_check(
            "ks overshoot vs exponential",
            &u,
            |w| if w <= 0.0 { 0.0 } else { -(-mu * w).exp_m1() },
            level,
        )?);
    }
    Ok(Outcome {
        seed: Some(sc.seed),
        outputs: vec!["samples.csv".into()],
        checks,
    })
}

pub fn verify_asymptotic(cfg: &LoadedConfig, cli: &Cli) -> Result<Outcome, CliError> {
    let p = cfg.spectrally_positive()?;
    let alpha = cfg.regime()?.alpha;
    let regime = AsymptoticRegime::new(alpha, p)?;
    let p = regime.process();
    let ladder = build_ladder_tilted(p, cfg.grid()?, alpha)?;
    let laws = AsymptoticLaws::for_regime(&regime, &ladder)?;
    let verify = cfg.verify();
    let mut checks = Vec::new();
    let mut outputs = Vec::new();

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(
        cli.out.join("decomposition.csv"),
    )?));
    w.write_record(["u", "comp_jump", "comp_drift_in", "sum", "gbar"])
        .map_err(Error::from)?;
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let u = 0.1 * k as f64;
        let d = laws.decomposition_check(u)?;
        worst = worst.max((d.sum - d.gbar).abs());
        w.write_record([u, d.comp_jump, d.comp_drift_in, d.sum, d.gbar].map(|z| z.to_string()))
            .map_err(Error::from)?;
    }
    w.flush()?;
    outputs.push("decomposition.csv".to_string());
    checks.push(Check::at_most(
        "decomposition |sum - gbar| on [0, 10]",
        worst,
        1e-8,
    ));

    match laws.mass_accounting() {
        Ok(m) => {
            checks.push(Check::at_most(
                "mass accounting |total - 1|",
                (m.total - 1.0).abs(),
                1e-6,
            ));
        }
        Err(Error::MassAccounting { total, .. }) => {
            checks.push(Check::at_most(
                "mass accounting |total - 1|",
                (total - 1.0).abs(),
                1e-6,
            ));
        }
        Err(e) => return Err(e.into()),
    }

    let psi = p.laplace_exponent(-alpha)?;
    let from_psi = -psi / alpha;
    checks.push(Check::at_most(
        "consistency q + xi(-alpha) vs -psi(-alpha)/alpha (relative)",
        ((laws.kappa() - from_psi) / from_psi).abs(),
        1e-8,
    ));
    checks.push(Check::at_most(
        "creeping |1 - gbar(0+) - atom|",
        (1.0 - laws.gbar(0.0)? - laws.creeping_atom()).abs(),
        1e-8,
    ));
    let ratio = ladder.tail_equivalence_ratio(alpha, 20.0)?;
    checks.push(Check::within(
        "tail equivalence ratio at u = 20",
        ratio,
        0.95,
        1.05,
    ));

    // Monte Carlo overshoot at increasing levels against the limit law.
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(
        cli.out.join("convergence.csv"),
    )?));
    w.write_record([
        "x",
        "paths",
        "passages",
        "n_effective",
        "passage_estimate",
        "passage_closed_form",
        "ks_distance",
    ])
    .map_err(Error::from)?;
    let mut distances = Vec::new();
    let mut seed = None;
    for &x in &verify.x_ladder {
        let sc = sim_config(cfg, cli, Some(x))?;
        seed = Some(sc.seed);
        let simulator = PassageSimulator::spectrally_positive(p, sc.tilt)?;
        let comeback = LadderComeback::new(&ladder, sc.miss_epsilon)?;
        let outcomes = simulator.run(&sc, &comeback)?;
        let ps = passages(&outcomes);
        let weights: Vec<f64> = ps.iter().map(|s| s.weight).collect();
        let e = empirical(
            ps.iter().map(|s| s.overshoot).collect(),
            &weights,
            verify.min_n_effective,
        )?;
        let ks = ks_distance(&e, |u| 1.0 - laws.gbar(u).unwrap_or(f64::NAN))?;
        let (estimate, _) = passage_estimate(&outcomes);
        let closed = ladder.q() * ladder.u().tail(x);
        w.write_record([
            x.to_string(),
            outcomes.len().to_string(),
            ps.len().to_string(),
            e.n_effective().to_string(),
            estimate.to_string(),
            closed.to_string(),
            ks.statistic.to_string(),
        ])
        .map_err(Error::from)?;
        distances.push((x, ks.statistic));
    }
    w.flush()?;
    outputs.push("convergence.csv".to_string());
    if let Some(&(x, d)) = distances.last() {
        checks.push(Check::at_most(
            format!("overshoot sup distance to limit at x = {x}"),
            d,
            0.02,
        ));
        let monotone = distances.windows(2).all(|p| p[1].1 < p[0].1);
        checks.push(Check::flag(
            "sup distances decrease along the level ladder",
            monotone,
            "strictly decreasing",
        ));
    }
    Ok(Outcome {
        seed,
        outputs,
        checks,
    })
}

pub fn export_ladder(cfg: &LoadedConfig, cli: &Cli) -> Result<Outcome, CliError> {
    let tilt = cli
        .tilt
        .or_else(|| cfg.config.regime.map(|r| r.alpha))
        .unwrap_or(0.0);
    let ladder = match cfg.model_kind()? {
        "synthetic_ladder" => cfg.synthetic_ladder(tilt)?,
        _ => build_ladder_tilted(&cfg.spectrally_positive()?, cfg.grid()?, tilt)?,
    };
    ladder.write_csv(BufWriter::new(File::create(cli.out.join("ladder.csv"))?))?;
    Ok(Outcome {
        seed: None,
        outputs: vec!["ladder.csv".into()],
        checks: Vec::new(),
    })
}
