//! Prints one PASS/FAIL line per acceptance criterion and exits nonzero if
//! any criterion fails. Every criterion runs regardless of earlier failures.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use levy_overshoot::ladder::{build_ladder, build_ladder_tilted, laplace_u_check, LadderData};
use levy_overshoot::laws::{
    pollaczek_khintchine, stable_norm_const, stable_triple_mass, AsymptoticLaws, PassageLaw,
};
use levy_overshoot::process::{AsymptoticRegime, SpectrallyPositiveBV, StableSpec};
use levy_overshoot::rw_oracle::{verify_identity, Bounds, Variant};
use levy_overshoot::simulate::{passages, LadderComeback, PassageSimulator, SimConfig};
use levy_overshoot::stats::wilson_interval;
use levy_overshoot_verification::{config, StableGrid, Verdict, FLEET_REGIMES};
use levy_overshoot_cli::{execute, Cli, Command, LoadedConfig, RunManifest};

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn load(name: &str) -> Result<LoadedConfig, String> {
    LoadedConfig::load(&config(name)).map_err(err)
}

fn exp_model() -> Result<(SpectrallyPositiveBV, LadderData), String> {
    let cfg = load("exp_model.toml")?;
    let p = cfg.spectrally_positive().map_err(err)?;
    let ladder = build_ladder(&p, cfg.grid().map_err(err)?).map_err(err)?;
    Ok((p, ladder))
}

fn cli(command: Command, config_name: &str, out: &Path) -> Cli {
    Cli {
        command,
        config: Some(config(config_name)),
        seed: None,
        out: out.to_path_buf(),
        samples: None,
        tilt: None,
        level: None,
    }
}

fn check<'m>(m: &'m RunManifest, prefix: &str) -> Result<&'m levy_overshoot_cli::Check, String> {
    m.checks
        .iter()
        .find(|c| c.name.starts_with(prefix))
        .ok_or_else(|| format!("manifest has no check `{prefix}`"))
}

fn random_walk_identity() -> Outcome {
    let started = Instant::now();
    let steps = load("lattice.toml")?.lattice_steps().map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut tuples = 0;
    for (_, step) in &steps {
        for variant in [Variant::LastMax, Variant::FirstMax] {
            for x in 0..=5 {
                let r = verify_identity(step, Bounds::new(x, 6, 6).map_err(err)?, variant)
                    .map_err(err)?;
                worst = worst.max(r.max_error);
                tuples += r.rows.len();
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-12 && secs <= 60.0,
        format!("{} laws, both variants, {tuples} tuples, max error {worst:e}, {secs:.1}s (limits 1e-12, 60s)", steps.len()),
    ))
}

fn renewal_transform() -> Outcome {
    let (p, ladder) = exp_model()?;
    let mut worst: f64 = 0.0;
    for beta in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let (grid, closed) = laplace_u_check(&ladder, &p, beta).map_err(err)?;
        worst = worst.max(((grid - closed) / closed).abs());
    }
    let (at_one, _) = laplace_u_check(&ladder, &p, 1.0).map_err(err)?;
    let reference = (at_one - 2.0 / 3.0).abs() / (2.0 / 3.0);
    Ok((
        worst <= 1e-6 && reference <= 1e-6,
        format!("max relative error {worst:e} over β ∈ {{0.25,…,4}}; value at β=1 {at_one} vs 2/3"),
    ))
}

fn passage_probability() -> Outcome {
    let started = Instant::now();
    let (p, ladder) = exp_model()?;
    let mut worst: f64 = 0.0;
    for k in 0..=40 {
        let x = 0.125 * k as f64;
        let closed = 0.5 * (-x / 2.0).exp();
        let grid = pollaczek_khintchine(&ladder, x).map_err(err)?;
        worst = worst.max(((grid - closed) / closed).abs());
    }
    let x = 2.0;
    let cfg = SimConfig::new(20240613, 1_000_000, x, 1e-9, 0.0).map_err(err)?;
    let sim = PassageSimulator::spectrally_positive(&p, 0.0).map_err(err)?;
    let comeback = LadderComeback::new(&ladder, cfg.miss_epsilon).map_err(err)?;
    let out = sim.run(&cfg, &comeback).map_err(err)?;
    let hits = passages(&out).len() as f64;
    let (lo, hi) = wilson_interval(hits, out.len() as f64, 3.0).map_err(err)?;
    let target = pollaczek_khintchine(&ladder, x).map_err(err)?;
    let secs = started.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-4 && lo <= target && target <= hi && secs <= 120.0,
        format!(
            "grid vs closed form on [0,5]: max relative error {worst:e}; MC frequency {} (n=1e6), \
             Wilson z=3 [{lo:.5}, {hi:.5}] vs qU(2,∞) = {target:.5}; {secs:.1}s",
            hits / out.len() as f64
        ),
    ))
}

fn quintuple_marginals() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let m = execute(&cli(Command::VerifyPassage, "exp_model.toml", dir.path())).map_err(err)?;
    let names = [
        "ks overshoot",
        "ks undershoot",
        "ks last-max undershoot",
        "ks overshoot vs exponential",
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for n in names {
        let c = check(&m, n)?;
        pass &= c.pass;
        parts.push(format!("{n} {:.4} ({})", c.value, c.accept));
    }
    Ok((pass, format!("x=2, n=1e5, 1% level: {}", parts.join("; "))))
}

fn asymptotic_overshoot() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let m = execute(&cli(
        Command::VerifyAsymptotic,
        "tilted_pareto.toml",
        dir.path(),
    ))
    .map_err(err)?;
    let at8 = check(&m, "overshoot sup distance to limit at x = 8")?;
    let monotone = check(&m, "sup distances decrease")?;
    let table = std::fs::read_to_string(dir.path().join("convergence.csv")).map_err(err)?;
    let distances: Vec<String> = table
        .lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Some(format!(
                "x={}: {:.4}",
                f.first()?,
                f.last()?.parse::<f64>().ok()?
            ))
        })
        .collect();
    // The exact finite-level law bounds how close any sample can get.
    let exact = exact_distance_at(8.0)?;
    Ok((
        at8.pass && monotone.pass,
        format!(
            "MC sup distances {}; monotone {}; at x=8 {:.4} vs ≤ 0.02 (exact finite-level distance {exact:.4})",
            distances.join(", "),
            monotone.pass,
            at8.value
        ),
    ))
}

fn tilted_pareto() -> Result<(AsymptoticRegime, LadderData), String> {
    let cfg = load("tilted_pareto.toml")?;
    let alpha = cfg.regime().map_err(err)?.alpha;
    let regime =
        AsymptoticRegime::new(alpha, cfg.spectrally_positive().map_err(err)?).map_err(err)?;
    let ladder =
        build_ladder_tilted(regime.process(), cfg.grid().map_err(err)?, alpha).map_err(err)?;
    Ok((regime, ladder))
}

fn exact_distance_at(x: f64) -> Result<f64, String> {
    let (regime, ladder) = tilted_pareto()?;
    let laws = AsymptoticLaws::for_regime(&regime, &ladder).map_err(err)?;
    let law = PassageLaw::new(&ladder, regime.process(), x).map_err(err)?;
    let mut d: f64 = 0.0;
    for k in 1..=400 {
        let u = 0.025 * k as f64;
        let g = laws.gbar(u).map_err(err)?;
        d = d.max((law.overshoot_survival(u) / law.conditional_mass() - g).abs());
    }
    Ok(d)
}

fn decomposition() -> Outcome {
    let (regime, ladder) = tilted_pareto()?;
    let laws = AsymptoticLaws::for_regime(&regime, &ladder).map_err(err)?;
    let mut worst: f64 = 0.0;
    for k in 0..=1000 {
        let d = laws.decomposition_check(0.01 * k as f64).map_err(err)?;
        worst = worst.max((d.sum - d.gbar).abs());
    }
    Ok((
        worst <= 1e-8,
        format!("max |comp_jump + comp_drift_in − Ḡ| on u ∈ [0,10] step 0.01: {worst:e}"),
    ))
}

/// Ladder data and limit laws of a fleet regime config.
struct FleetRegime {
    name: &'static str,
    alpha: f64,
    regime: Option<AsymptoticRegime>,
    ladder: LadderData,
}

impl FleetRegime {
    fn load(name: &'static str) -> Result<Self, String> {
        let cfg = load(name)?;
        let alpha = cfg.regime().map_err(err)?.alpha;
        if cfg.model_kind().map_err(err)? == "synthetic_ladder" {
            return Ok(Self {
                name,
                alpha,
                regime: None,
                ladder: cfg.synthetic_ladder(alpha).map_err(err)?,
            });
        }
        let regime =
            AsymptoticRegime::new(alpha, cfg.spectrally_positive().map_err(err)?).map_err(err)?;
        let ladder =
            build_ladder_tilted(regime.process(), cfg.grid().map_err(err)?, alpha).map_err(err)?;
        Ok(Self {
            name,
            alpha,
            regime: Some(regime),
            ladder,
        })
    }

    fn laws(&self) -> Result<AsymptoticLaws<'_>, String> {
        match &self.regime {
            Some(r) => AsymptoticLaws::for_regime(r, &self.ladder),
            None => AsymptoticLaws::new(&self.ladder, self.alpha),
        }
        .map_err(err)
    }
}

fn mass_accounting() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in FLEET_REGIMES {
        let f = FleetRegime::load(name)?;
        let m = f.laws()?.mass_accounting().map_err(err)?;
        pass &= (m.total - 1.0).abs() <= 1e-6;
        if *name == "tilted_pareto.toml" {
            pass &= (m.large_jump - 0.37356).abs() <= 1e-4
                && (m.drift_in - 0.62644).abs() <= 1e-4
                && m.atom.abs() <= 1e-4;
        }
        parts.push(format!(
            "{}: ({:.5}, {:.5}, {:.5}) total {:.9}",
            f.name, m.large_jump, m.drift_in, m.atom, m.total
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn tail_equivalence() -> Outcome {
    let (regime, ladder) = tilted_pareto()?;
    let ratio = ladder
        .tail_equivalence_ratio(regime.alpha(), 20.0)
        .map_err(err)?;
    let far: Vec<String> = [40.0, 80.0, 160.0, 320.0]
        .iter()
        .filter_map(|&u| {
            Some(format!(
                "u={u}: {:.4}",
                ladder.tail_equivalence_ratio(regime.alpha(), u).ok()?
            ))
        })
        .collect();
    Ok((
        (ratio - 1.0).abs() <= 0.05,
        format!(
            "ratio at u=20: {ratio:.4} (needs 1 ± 0.05); further out {}",
            far.join(", ")
        ),
    ))
}

fn stable_normalization() -> Outcome {
    let grid = StableGrid::load();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for &g in &grid.indices {
        for &r in &grid.rhos {
            let Ok(s) = StableSpec::new(g, r, 1.0, 1.0) else {
                continue;
            };
            used += 1;
            let m = stable_triple_mass(&s, grid.barrier).map_err(err)?;
            worst = worst.max((m - 1.0).abs());
        }
    }
    let cauchy = stable_norm_const(&StableSpec::new(1.0, 0.5, 1.0, 1.0).map_err(err)?);
    let c_err = (cauchy - 1.0 / (PI * PI)).abs();
    Ok((
        worst <= 1e-3 && c_err <= 1e-9 && used > 0,
        format!("{used} admissible (γ,ρ) pairs, max |mass − 1| {worst:e}; Cauchy constant {cauchy} (error {c_err:e})"),
    ))
}

fn consistency() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in FLEET_REGIMES {
        let f = FleetRegime::load(name)?;
        let laws = f.laws()?;
        let creep = (1.0 - laws.gbar(0.0).map_err(err)? - laws.creeping_atom()).abs();
        pass &= creep <= 1e-8;
        let mut part = format!("{}: |1 − Ḡ(0+) − creeping| {creep:e}", f.name);
        if let Some(r) = &f.regime {
            let psi = r.process().laplace_exponent(-f.alpha).map_err(err)?;
            let from_psi = -psi / f.alpha;
            let rel = ((laws.kappa() - from_psi) / from_psi).abs();
            pass &= rel <= 1e-8;
            part.push_str(&format!(", q + ξ(−α) vs −ψ(−α)/α relative {rel:e}"));
        }
        parts.push(part);
    }
    Ok((pass, parts.join("; ")))
}

fn determinism() -> Outcome {
    let run = |threads: usize| -> Result<(tempfile::TempDir, RunManifest), String> {
        let dir = tempfile::tempdir().map_err(err)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(err)?;
        let m = pool
            .install(|| execute(&cli(Command::VerifyPassage, "exp_model.toml", dir.path())))
            .map_err(err)?;
        Ok((dir, m))
    };
    let (a, ma) = run(1)?;
    let (b, mb) = run(4)?;
    let mut files: Vec<PathBuf> = ma.outputs.iter().map(PathBuf::from).collect();
    files.push("manifest.json".into());
    let mut differing = Vec::new();
    for f in &files {
        let x = std::fs::read(a.path().join(f)).map_err(err)?;
        let y = std::fs::read(b.path().join(f)).map_err(err)?;
        if x != y {
            differing.push(f.display().to_string());
        }
    }
    Ok((
        differing.is_empty() && ma == mb,
        if differing.is_empty() {
            format!(
                "{} files byte-identical across 1 and 4 threads",
                files.len()
            )
        } else {
            format!("differing files: {}", differing.join(", "))
        },
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("random-walk quintuple identity", random_walk_identity),
        ("renewal transform β/ψ(β)", renewal_transform),
        ("passage probability qU(x,∞)", passage_probability),
        ("quintuple marginals at x=2", quintuple_marginals),
        ("asymptotic overshoot vs Ḡ", asymptotic_overshoot),
        ("Ḡ decomposition", decomposition),
        ("mass accounting", mass_accounting),
        ("renewal tail equivalence", tail_equivalence),
        ("stable triple law normalization", stable_normalization),
        ("κ and creeping consistency", consistency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let v = Verdict {
            id: i + 1,
            name,
            pass,
            detail,
            elapsed: started.elapsed(),
        };
        println!("{}", v.line());
        failed += usize::from(!pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
