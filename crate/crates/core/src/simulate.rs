//! Exact event-driven simulation of first passage over a level.
//!
//! Between jumps the path moves linearly, so passage, the running maximum and
//! the time it was last attained are all read off at jump epochs (or at the
//! hitting time of the level when the drift is upward). Under an exponential
//! tilt `θ` jumps arrive at rate `∫ e^{θy} Π(dy)` with law `e^{θy}Π(dy)/·`,
//! and each passage carries the likelihood ratio `exp(−θ X_τ + κ(θ) τ)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ladder::LadderData;
use crate::measures::{JumpMeasure, JumpSampler};
use crate::process::{SpectrallyPositiveBV, TwoSidedCPP};

/// Quantities at first passage over `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuintupleSample {
    /// `τ − Ḡ`, time since the running maximum was last attained.
    pub t_rel: f64,
    /// `Ḡ`, the last time the running maximum was attained before passage.
    pub g: f64,
    /// `X_τ − x`.
    pub overshoot: f64,
    /// `x − X_{τ−}`.
    pub undershoot: f64,
    /// `x − X̄_{τ−}`.
    pub lastmax_undershoot: f64,
    pub crept: bool,
    pub weight: f64,
}

impl QuintupleSample {
    pub fn passage_time(&self) -> f64 {
        self.g + self.t_rel
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Passage(QuintupleSample),
    NoPassage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub barrier: f64,
    pub miss_epsilon: f64,
    pub tilt: f64,
}

impl SimConfig {
    pub fn new(
        seed: u64,
        n_samples: usize,
        barrier: f64,
        miss_epsilon: f64,
        tilt: f64,
    ) -> Result<Self> {
        if !(barrier >= 0.0 && barrier.is_finite()) {
            return Err(Error::config(format!("barrier must be ≥ 0, got {barrier}")));
        }
        if !(miss_epsilon > 0.0 && miss_epsilon <= 1e-6) {
            return Err(Error::config(format!(
                "miss_epsilon must lie in (0, 1e-6], got {miss_epsilon}"
            )));
        }
        if !(tilt >= 0.0 && tilt.is_finite()) {
            return Err(Error::config(format!("tilt must be ≥ 0, got {tilt}")));
        }
        Ok(Self {
            seed,
            n_samples,
            barrier,
            miss_epsilon,
            tilt,
        })
    }
}

/// Upper bound on the probability of ever rising `gap` above the current level.
pub trait Comeback: Sync {
    fn bound(&self, gap: f64) -> f64;
}

/// `q U(gap, ∞)` from the ascending renewal measure; beyond the grid the
/// value at the grid end bounds the tail.
pub struct LadderComeback<'a> {
    ladder: &'a LadderData,
}

impl<'a> LadderComeback<'a> {
    /// Fails unless the bound at the grid end is already below `epsilon`,
    /// which guarantees every path is eventually declared.
    pub fn new(ladder: &'a LadderData, epsilon: f64) -> Result<Self> {
        let end = ladder.q() * ladder.u().tail(ladder.length());
        if end >= epsilon {
            return Err(Error::config(format!(
                "renewal grid too short: q U(L, ∞) = {end:e} is not below miss_epsilon {epsilon:e}"
            )));
        }
        Ok(Self { ladder })
    }
}

impl Comeback for LadderComeback<'_> {
    fn bound(&self, gap: f64) -> f64 {
        self.ladder.q() * self.ladder.u().tail(gap.max(0.0).min(self.ladder.length()))
    }
}

/// `e^{−R·gap}` with `R` the Lundberg root.
pub struct LundbergComeback {
    pub root: f64,
}

impl Comeback for LundbergComeback {
    fn bound(&self, gap: f64) -> f64 {
        (-self.root * gap.max(0.0)).exp()
    }
}

/// Never declares a miss; for processes that pass every level.
pub struct CertainPassage;

impl Comeback for CertainPassage {
    fn bound(&self, _gap: f64) -> f64 {
        1.0
    }
}

/// Path position, running maximum and its last attainment time.
#[derive(Debug, Clone, Copy)]
pub struct PathState {
    barrier: f64,
    t: f64,
    pos: f64,
    max: f64,
    g: f64,
}

impl PathState {
    pub fn new(barrier: f64) -> Self {
        Self {
            barrier,
            t: 0.0,
            pos: 0.0,
            max: 0.0,
            g: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn position(&self) -> f64 {
        self.pos
    }

    /// Moves linearly to time `t_new`; returns the creeping passage if the
    /// upward drift reaches the level first.
    pub fn drift_to(&mut self, t_new: f64, drift: f64) -> Option<QuintupleSample> {
        if drift > 0.0 {
            let hit = self.t + (self.barrier - self.pos) / drift;
            if hit <= t_new {
                return Some(QuintupleSample {
                    t_rel: 0.0,
                    g: hit,
                    overshoot: 0.0,
                    undershoot: 0.0,
                    lastmax_undershoot: 0.0,
                    crept: true,
                    weight: 1.0,
                });
            }
        }
        self.pos += drift * (t_new - self.t);
        self.t = t_new;
        if self.pos >= self.max {
            self.max = self.pos;
            self.g = self.t;
        }
        None
    }

    /// Applies a jump at the current time.
    pub fn jump(&mut self, size: f64) -> Option<QuintupleSample> {
        let next = self.pos + size;
        if next > self.barrier {
            return Some(QuintupleSample {
                t_rel: self.t - self.g,
                g: self.g,
                overshoot: next - self.barrier,
                undershoot: self.barrier - self.pos,
                lastmax_undershoot: self.barrier - self.max,
                crept: false,
                weight: 1.0,
            });
        }
        self.pos = next;
        if self.pos >= self.max {
            self.max = self.pos;
            self.g = self.t;
        }
        None
    }
}

/// A jump at `time` of signed size `jump`.
#[derive(Debug, Clone, Copy)]
pub struct PathEvent {
    pub time: f64,
    pub jump: f64,
}

/// Replays a deterministic path to its first passage over `barrier`.
pub fn record_last_max(drift: f64, barrier: f64, events: &[PathEvent]) -> Option<QuintupleSample> {
    let mut s = PathState::new(barrier);
    for e in events {
        if let Some(hit) = s.drift_to(e.time, drift) {
            return Some(hit);
        }
        if let Some(hit) = s.jump(e.jump) {
            return Some(hit);
        }
    }
    None
}

/// Linear drift plus independent upward and downward compound Poisson jumps.
#[derive(Debug, Clone)]
pub struct PassageSimulator {
    drift: f64,
    up: Option<JumpSampler>,
    down: Option<JumpSampler>,
    kappa: f64,
    tilt: f64,
}

impl PassageSimulator {
    pub fn spectrally_positive(p: &SpectrallyPositiveBV, tilt: f64) -> Result<Self> {
        let kappa = p.cumulant(tilt).map_err(|e| tilt_error(tilt, e))?;
        Self::build(-p.drift_down(), p.jumps(), None, tilt, kappa)
    }

    pub fn two_sided(p: &TwoSidedCPP, tilt: f64) -> Result<Self> {
        if p.drift() == 0.0 {
            return Err(Error::config(
                "zero drift makes X a pure compound Poisson process, which the passage identities exclude",
            ));
        }
        let kappa = p.cumulant(tilt).map_err(|e| tilt_error(tilt, e))?;
        Self::build(p.drift(), p.up(), Some(p.down()), tilt, kappa)
    }

    fn build(
        drift: f64,
        up: &JumpMeasure,
        down: Option<&JumpMeasure>,
        tilt: f64,
        kappa: f64,
    ) -> Result<Self> {
        let up = if up.rate() > 0.0 {
            Some(up.sampler(tilt).map_err(|e| tilt_error(tilt, e))?)
        } else {
            None
        };
        let down = match down {
            Some(d) if d.rate() > 0.0 => Some(d.sampler(-tilt).map_err(|e| tilt_error(tilt, e))?),
            _ => None,
        };
        Ok(Self {
            drift,
            up,
            down,
            kappa,
            tilt,
        })
    }

    /// `log E e^{θX₁}` at the simulator's tilt.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn log_weight(&self, pos: f64, t: f64) -> f64 {
        -self.tilt * pos + self.kappa * t
    }

    /// Runs one path with its own random stream.
    pub fn run_path<R: Rng + ?Sized>(
        &self,
        barrier: f64,
        comeback: &dyn Comeback,
        miss_epsilon: f64,
        rng: &mut R,
    ) -> Outcome {
        let up_rate = self.up.as_ref().map_or(0.0, |s| s.rate());
        let down_rate = self.down.as_ref().map_or(0.0, |s| s.rate());
        let total = up_rate + down_rate;
        let mut s = PathState::new(barrier);
        loop {
            let wait = -(1.0 - rng.random::<f64>()).ln() / total;
            if let Some(mut hit) = s.drift_to(s.t + wait, self.drift) {
                hit.weight = self.log_weight(barrier, hit.passage_time()).exp();
                return Outcome::Passage(hit);
            }
            let is_up = rng.random::<f64>() * total < up_rate;
            let size = if is_up {
                self.up.as_ref().map_or(0.0, |u| u.sample(rng))
            } else {
                -self.down.as_ref().map_or(0.0, |d| d.sample(rng))
            };
            if let Some(mut hit) = s.jump(size) {
                hit.weight = self.log_weight(barrier + hit.overshoot, s.t).exp();
                return Outcome::Passage(hit);
            }
            let log_w = self.log_weight(s.pos, s.t);
            if log_w.exp() * comeback.bound(barrier - s.pos) < miss_epsilon {
                return Outcome::NoPassage;
            }
        }
    }

    /// All paths of `cfg`, in sample order; each path `i` uses the ChaCha8
    /// stream `i` under `cfg.seed`, so output is independent of threading.
    pub fn run(&self, cfg: &SimConfig, comeback: &dyn Comeback) -> Result<Vec<Outcome>> {
        if (cfg.tilt - self.tilt).abs() > 0.0 {
            return Err(Error::config("simulator tilt differs from SimConfig tilt"));
        }
        Ok((0..cfg.n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                self.run_path(cfg.barrier, comeback, cfg.miss_epsilon, &mut rng)
            })
            .collect())
    }
}

fn tilt_error(tilt: f64, e: Error) -> Error {
    Error::config(format!(
        "tilt {tilt} is outside the jump law's moment radius: {e}"
    ))
}

/// `(estimate, standard error)` of `P(τ⁺ < ∞)` from weighted outcomes.
pub fn passage_estimate(outcomes: &[Outcome]) -> (f64, f64) {
    let n = outcomes.len() as f64;
    if outcomes.is_empty() {
        return (0.0, 0.0);
    }
    let (mut s, mut s2) = (0.0, 0.0);
    for o in outcomes {
        if let Outcome::Passage(q) = o {
            s += q.weight;
            s2 += q.weight * q.weight;
        }
    }
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Passage samples only.
pub fn passages(outcomes: &[Outcome]) -> Vec<QuintupleSample> {
    outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Passage(q) => Some(*q),
            Outcome::NoPassage => None,
        })
        .collect()
}

/// Writes passage samples with a commented provenance header.
pub fn write_samples_csv<W: Write>(
    mut w: W,
    outcomes: &[Outcome],
    seed: u64,
    model_hash: &str,
    miss_epsilon: f64,
) -> Result<()> {
    let ps = passages(outcomes);
    writeln!(w, "# seed={seed}")?;
    writeln!(w, "# model={model_hash}")?;
    writeln!(w, "# miss_epsilon={miss_epsilon:e}")?;
    writeln!(w, "# paths={} passages={}", outcomes.len(), ps.len())?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t_rel", "g", "u", "v", "y", "crept", "weight"])?;
    for q in &ps {
        wtr.write_record([
            q.t_rel.to_string(),
            q.g.to_string(),
            q.overshoot.to_string(),
            q.undershoot.to_string(),
            q.lastmax_undershoot.to_string(),
            q.crept.to_string(),
            q.weight.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
