//! Exact samplers for jump laws under exponential tilting.
//!
//! Under the tilt `θ` the jump intensity becomes `e^{θy} Π(dy)`, which has
//! total rate `rate · M(θ)` and jump law `e^{θy} F(dy) / M(θ)`.

use rand::Rng;

use super::{JumpFamily, JumpMeasure, TabulatedLaw};
use crate::error::Result;
use crate::quad;

/// Draws jump sizes from `e^{θy} F(dy) / M(θ)`.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    rate: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Exponential(f64),
    /// Mixture of laws `∝ e^{-by}(1+y)^{-k}` with cumulative weights.
    Mixture(Vec<(f64, PowerExp)>),
    Tabulated {
        law: TabulatedLaw,
        theta: f64,
        cumulative: Vec<f64>,
    },
}

/// Law with density proportional to `e^{-by} (1 + y)^{-k}`.
#[derive(Debug, Clone, Copy)]
struct PowerExp {
    b: f64,
    k: f64,
    from_pareto: bool,
}

/// `∫₀^∞ e^{-by} (1+y)^{-k} dy`.
fn power_exp_integral(b: f64, k: f64) -> Result<f64> {
    if b == 0.0 {
        return Ok(1.0 / (k - 1.0));
    }
    quad::integrate_to_infinity(
        |y| (-b * y).exp() * (1.0 + y).powf(-k),
        0.0,
        quad::Tolerance::new(1e-15, 1e-13),
    )
}

impl PowerExp {
    fn new(b: f64, k: f64) -> Self {
        // Acceptance of the Exp(b) proposal is b·I, of the Pareto(k−1) proposal (k−1)·I.
        let from_pareto = b == 0.0 || (k > 1.0 && k - 1.0 > b);
        Self { b, k, from_pareto }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u1 = 1.0 - rng.random::<f64>();
            if self.from_pareto {
                let y = u1.powf(-1.0 / (self.k - 1.0)) - 1.0;
                if self.b == 0.0 || rng.random::<f64>() <= (-self.b * y).exp() {
                    return y;
                }
            } else {
                let y = -u1.ln() / self.b;
                if self.k == 0.0 || rng.random::<f64>() <= (1.0 + y).powf(-self.k) {
                    return y;
                }
            }
        }
    }
}

impl JumpMeasure {
    /// Sampler for the jump law tilted by `e^{θy}`; `θ = 0` is the plain law.
    pub fn sampler(&self, theta: f64) -> Result<JumpSampler> {
        self.check_tilt(theta)?;
        let (mgf, kind) = match &self.family {
            JumpFamily::Exponential { decay } => {
                (decay / (decay - theta), Kind::Exponential(decay - theta))
            }
            JumpFamily::TiltedPareto { decay, power } => {
                let b = decay - theta;
                let mut parts = Vec::new();
                if *decay > 0.0 {
                    parts.push((
                        decay * power_exp_integral(b, *power)?,
                        PowerExp::new(b, *power),
                    ));
                }
                if *power > 0.0 {
                    parts.push((
                        power * power_exp_integral(b, power + 1.0)?,
                        PowerExp::new(b, power + 1.0),
                    ));
                }
                let total: f64 = parts.iter().map(|p| p.0).sum();
                let mut acc = 0.0;
                for p in parts.iter_mut() {
                    acc += p.0 / total;
                    p.0 = acc;
                }
                (total, Kind::Mixture(parts))
            }
            JumpFamily::Tabulated(law) => {
                let mut cumulative = Vec::with_capacity(law.knots().len() - 1);
                let mut acc = 0.0;
                for i in 0..law.knots().len() - 1 {
                    acc += if theta == 0.0 {
                        law.cell_mass(i)
                    } else {
                        law.cell_tilted_mass(theta, i)
                    };
                    cumulative.push(acc);
                }
                (
                    acc,
                    Kind::Tabulated {
                        law: law.clone(),
                        theta,
                        cumulative,
                    },
                )
            }
        };
        Ok(JumpSampler {
            rate: self.rate * mgf,
            kind,
        })
    }
}

impl JumpSampler {
    /// Total intensity of the tilted jump measure.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Exponential(decay) => -(1.0 - rng.random::<f64>()).ln() / decay,
            Kind::Mixture(parts) => {
                let u: f64 = rng.random();
                let part = parts
                    .iter()
                    .find(|p| u < p.0)
                    .unwrap_or_else(|| parts.last().expect("nonempty mixture"));
                part.1.sample(rng)
            }
            Kind::Tabulated {
                law,
                theta,
                cumulative,
            } => {
                let total = *cumulative.last().expect("nonempty table");
                let u = rng.random::<f64>() * total;
                let i = cumulative
                    .partition_point(|c| *c <= u)
                    .min(cumulative.len() - 1);
                let (a, b) = (law.knots()[i], law.knots()[i + 1]);
                let top = if *theta > 0.0 { b } else { a };
                loop {
                    let y = law.invert_in_cell(i, rng.random::<f64>() * law.cell_mass(i));
                    if *theta == 0.0 || rng.random::<f64>() <= (theta * (y - top)).exp() {
                        return y;
                    }
                }
            }
        }
    }
}
