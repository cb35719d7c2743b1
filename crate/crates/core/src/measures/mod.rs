//! One-sided jump measures, discretized measures on a uniform grid, and the
//! convolution-equivalence tail diagnostic.
//!
//! A [`JumpMeasure`] is a finite measure `Π` on `(0, ∞)` written as
//! `rate × F` for a probability law `F` from one of a few families. Every
//! quantity that grows like `e^{θy}` has a *tilted* evaluator that folds the
//! exponential into the closed form, so integrals against `e^{θy} Π(dy)` stay
//! finite all the way out to `y = ∞`.

mod diagnostic;
mod grid;
mod sampler;
mod table;

pub use diagnostic::{log_grid, tail_ratio_diagnostic, DiagnosticOptions, TailDiagnostic};
pub use grid::{convolve, renewal_series, GridMeasure};
pub use sampler::JumpSampler;
pub use table::TabulatedLaw;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Probability law of a single jump.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpFamily {
    /// `F̄(y) = e^{-decay·y}`.
    Exponential { decay: f64 },
    /// `F̄(y) = e^{-decay·y} (1 + y)^{-power}`.
    TiltedPareto { decay: f64, power: f64 },
    /// Piecewise-linear density through tabulated knots.
    Tabulated(TabulatedLaw),
}

/// A finite jump intensity on `(0, ∞)`: `Π(dy) = rate · F(dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMeasure {
    rate: f64,
    family: JumpFamily,
    mean_jump: f64,
}

fn tight() -> Tolerance {
    Tolerance::new(1e-15, 1e-13)
}

impl JumpMeasure {
    pub fn exponential(rate: f64, decay: f64) -> Result<Self> {
        check_rate(rate)?;
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(Error::config(format!(
                "exponential jump decay must be positive, got {decay}"
            )));
        }
        Ok(Self {
            rate,
            family: JumpFamily::Exponential { decay },
            mean_jump: 1.0 / decay,
        })
    }

    pub fn tilted_pareto(rate: f64, decay: f64, power: f64) -> Result<Self> {
        check_rate(rate)?;
        if !(decay >= 0.0 && power >= 0.0 && decay.is_finite() && power.is_finite()) {
            return Err(Error::config(format!(
                "tilted-Pareto parameters must be nonnegative, got decay={decay}, power={power}"
            )));
        }
        if decay == 0.0 && power <= 1.0 {
            return Err(Error::config(
                "tilted-Pareto with decay 0 needs power > 1 for a finite mean jump",
            ));
        }
        let mut m = Self {
            rate,
            family: JumpFamily::TiltedPareto { decay, power },
            mean_jump: 0.0,
        };
        m.mean_jump = quad::integrate_to_infinity(|y| m.law_tail(y), 0.0, tight())?;
        Ok(m)
    }

    /// Builds a measure from a tabulated density. With `rate = None` the
    /// table is read as a Lévy density and its integral becomes the rate;
    /// otherwise the table is normalized and scaled to `rate`.
    pub fn tabulated(rate: Option<f64>, knots: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let (law, raw_mass) = TabulatedLaw::new(knots, density)?;
        let rate = rate.unwrap_or(raw_mass);
        check_rate(rate)?;
        let mean_jump = law.mean();
        Ok(Self {
            rate,
            family: JumpFamily::Tabulated(law),
            mean_jump,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn family(&self) -> &JumpFamily {
        &self.family
    }

    /// Mean of the normalized jump law, `∫ Π̄(y) dy / rate`.
    pub fn mean_jump(&self) -> f64 {
        self.mean_jump
    }

    /// Same jump law, different total intensity.
    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self {
            rate,
            ..self.clone()
        })
    }

    /// `F̄(y)` of the normalized law.
    pub fn law_tail(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        match &self.family {
            JumpFamily::Exponential { decay } => (-decay * y).exp(),
            JumpFamily::TiltedPareto { decay, power } => {
                (-decay * y).exp() * (1.0 + y).powf(-power)
            }
            JumpFamily::Tabulated(t) => t.tail(y),
        }
    }

    /// Density of the normalized law.
    pub fn law_density(&self, y: f64) -> f64 {
        self.law_tilted_density(0.0, y)
    }

    /// `e^{θy} F̄(y)` without intermediate overflow.
    pub fn law_tilted_tail(&self, theta: f64, y: f64) -> f64 {
        if y <= 0.0 {
            return (theta * y.max(0.0)).exp();
        }
        match &self.family {
            JumpFamily::Exponential { decay } => (-(decay - theta) * y).exp(),
            JumpFamily::TiltedPareto { decay, power } => {
                (-(decay - theta) * y).exp() * (1.0 + y).powf(-power)
            }
            JumpFamily::Tabulated(t) => {
                let tail = t.tail(y);
                if tail == 0.0 {
                    0.0
                } else {
                    (theta * y).exp() * tail
                }
            }
        }
    }

    /// `e^{θy} f(y)` for the normalized density `f`.
    pub fn law_tilted_density(&self, theta: f64, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        match &self.family {
            JumpFamily::Exponential { decay } => decay * (-(decay - theta) * y).exp(),
            JumpFamily::TiltedPareto { decay, power } => {
                let w = 1.0 + y;
                (-(decay - theta) * y).exp() * w.powf(-power) * (decay + power / w)
            }
            JumpFamily::Tabulated(t) => {
                let d = t.density(y);
                if d == 0.0 {
                    0.0
                } else {
                    (theta * y).exp() * d
                }
            }
        }
    }

    /// `Π̄(y) = Π(y, ∞)`.
    pub fn tail(&self, y: f64) -> f64 {
        self.rate * self.law_tail(y)
    }

    pub fn density(&self, y: f64) -> f64 {
        self.rate * self.law_density(y)
    }

    pub fn tilted_tail(&self, theta: f64, y: f64) -> f64 {
        self.rate * self.law_tilted_tail(theta, y)
    }

    pub fn tilted_density(&self, theta: f64, y: f64) -> f64 {
        self.rate * self.law_tilted_density(theta, y)
    }

    /// Supremum of admissible exponential tilts and whether it is attained.
    pub fn moment_radius(&self) -> (f64, bool) {
        match &self.family {
            JumpFamily::Exponential { decay } => (*decay, false),
            JumpFamily::TiltedPareto { decay, power } => (*decay, *power > 1.0),
            JumpFamily::Tabulated(_) => (f64::INFINITY, true),
        }
    }

    /// Errors unless `∫ e^{θy} Π(dy) < ∞`.
    pub fn check_tilt(&self, theta: f64) -> Result<()> {
        let (radius, closed) = self.moment_radius();
        if theta < radius || (closed && theta == radius) || self.rate == 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "exponential moment of order {theta} diverges; admissible tilts are {} {radius}",
                if closed { "≤" } else { "<" }
            )))
        }
    }

    /// `∫₀^∞ e^{θy} F̄(y) dy` of the normalized law.
    pub fn law_tail_transform(&self, theta: f64) -> Result<f64> {
        self.check_tilt(theta)?;
        match &self.family {
            JumpFamily::Exponential { decay } => Ok(1.0 / (decay - theta)),
            JumpFamily::TiltedPareto { .. } => {
                quad::integrate_to_infinity(|y| self.law_tilted_tail(theta, y), 0.0, tight())
            }
            JumpFamily::Tabulated(t) => Ok(t.tail_transform(theta)),
        }
    }

    /// `∫ e^{θy} F(dy)`, integrated against the density rather than the tail.
    pub fn law_mgf(&self, theta: f64) -> Result<f64> {
        self.check_tilt(theta)?;
        match &self.family {
            JumpFamily::Exponential { decay } => Ok(decay / (decay - theta)),
            JumpFamily::TiltedPareto { .. } => {
                quad::integrate_to_infinity(|y| self.law_tilted_density(theta, y), 0.0, tight())
            }
            JumpFamily::Tabulated(t) => Ok(t.mgf(theta)),
        }
    }

    /// `∫₀^∞ e^{θy} Π̄(y) dy`.
    pub fn tail_transform(&self, theta: f64) -> Result<f64> {
        if self.rate == 0.0 {
            return Ok(0.0);
        }
        Ok(self.rate * self.law_tail_transform(theta)?)
    }

    /// `∫ e^{θy} Π(dy)`.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        if self.rate == 0.0 {
            return Ok(0.0);
        }
        Ok(self.rate * self.law_mgf(theta)?)
    }

    /// `∫_y^∞ Π̄(z) dz`.
    pub fn integrated_tail(&self, y: f64) -> f64 {
        self.tilted_integrated_tail(0.0, y)
    }

    /// `e^{θy} ∫_y^∞ Π̄(z) dz`, evaluated as `∫₀^∞ e^{-θs} e^{θ(y+s)} Π̄(y+s) ds`.
    pub fn tilted_integrated_tail(&self, theta: f64, y: f64) -> f64 {
        if self.rate == 0.0 {
            return 0.0;
        }
        let y = y.max(0.0);
        let law = match &self.family {
            JumpFamily::Exponential { decay } => (-(decay - theta) * y).exp() / decay,
            JumpFamily::TiltedPareto { .. } => quad::integrate_to_infinity(
                |s| (-theta * s).exp() * self.law_tilted_tail(theta, y + s),
                0.0,
                tight(),
            )
            .unwrap_or(f64::NAN),
            JumpFamily::Tabulated(t) => {
                let v = t.integrated_tail(y);
                if v == 0.0 {
                    0.0
                } else {
                    (theta * y).exp() * v
                }
            }
        };
        self.rate * law
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate >= 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "jump rate must be finite and nonnegative, got {rate}"
        )))
    }
}
