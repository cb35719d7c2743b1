//! Process specifications: spectrally positive compound Poisson processes
//! with negative drift, two-sided compound Poisson processes for simulation,
//! and strictly stable processes.

use crate::error::{Error, Result};
use crate::measures::{
    log_grid, tail_ratio_diagnostic, DiagnosticOptions, JumpMeasure, TailDiagnostic,
};

/// `X_t = (compound Poisson upward jumps)_t − c·t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrallyPositiveBV {
    drift_down: f64,
    jumps: JumpMeasure,
}

impl SpectrallyPositiveBV {
    pub fn new(drift_down: f64, jumps: JumpMeasure) -> Result<Self> {
        if !(drift_down > 0.0 && drift_down.is_finite()) {
            return Err(Error::config(format!(
                "downward drift c must be positive (X is jumps minus c·t), got {drift_down}"
            )));
        }
        Ok(Self { drift_down, jumps })
    }

    pub fn drift_down(&self) -> f64 {
        self.drift_down
    }

    pub fn jumps(&self) -> &JumpMeasure {
        &self.jumps
    }

    /// `E X₁ = rate·mean_jump − c`.
    pub fn mean_x1(&self) -> f64 {
        if self.jumps.rate() == 0.0 {
            return -self.drift_down;
        }
        self.jumps.rate() * self.jumps.mean_jump() - self.drift_down
    }

    /// Errors unless the process drifts to `−∞`.
    pub fn require_drift_to_minus_infinity(&self) -> Result<()> {
        let m = self.mean_x1();
        if m < 0.0 {
            Ok(())
        } else {
            Err(Error::Assumption {
                clause: "(i)",
                detail: format!("E X₁ = {m} is not negative, so X does not drift to −∞"),
            })
        }
    }

    /// `ψ(β) = log E e^{−βX₁} = cβ − ∫(1 − e^{−βx}) Π(dx)`.
    pub fn laplace_exponent(&self, beta: f64) -> Result<f64> {
        if beta == 0.0 {
            return Ok(0.0);
        }
        if self.jumps.rate() == 0.0 {
            return Ok(self.drift_down * beta);
        }
        if let Err(e) = self.jumps.check_tilt(-beta) {
            let (radius, closed) = self.jumps.moment_radius();
            return Err(Error::domain(format!(
                "{e}; the Laplace exponent needs β {} −{radius}",
                if closed { "≥" } else { ">" }
            )));
        }
        let m = self.jumps.law_mgf(-beta)?;
        Ok(self.drift_down * beta - self.jumps.rate() * (1.0 - m))
    }

    /// `κ(θ) = log E e^{θX₁} = ψ(−θ)`, the cumulant used for exponential tilting.
    pub fn cumulant(&self, theta: f64) -> Result<f64> {
        self.laplace_exponent(-theta)
    }

    /// Largest `β ≥ 0` with `ψ(β) = a`.
    pub fn phi_inverse(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0) {
            return Err(Error::domain(format!("Φ needs a ≥ 0, got {a}")));
        }
        if a == 0.0 && self.mean_x1() < 0.0 {
            return Ok(0.0);
        }
        // {β ≥ 0 : ψ(β) ≤ a} is an interval [0, Φ(a)] by convexity and ψ(0) = 0.
        let mut hi = 1.0;
        while self.laplace_exponent(hi)? <= a {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::domain(format!("no bracket found for Φ({a})")));
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.laplace_exponent(mid)? <= a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Compound Poisson process with jumps of both signs plus a linear drift.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedCPP {
    drift: f64,
    up: JumpMeasure,
    down: JumpMeasure,
}

impl TwoSidedCPP {
    /// `down` describes the sizes of downward jumps as positive numbers.
    pub fn new(drift: f64, up: JumpMeasure, down: JumpMeasure) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::config("drift must be finite"));
        }
        if up.rate() == 0.0 && down.rate() == 0.0 {
            return Err(Error::config(
                "a two-sided process needs at least one jump component",
            ));
        }
        Ok(Self { drift, up, down })
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn up(&self) -> &JumpMeasure {
        &self.up
    }

    pub fn down(&self) -> &JumpMeasure {
        &self.down
    }

    pub fn mean_x1(&self) -> f64 {
        let up = if self.up.rate() > 0.0 {
            self.up.rate() * self.up.mean_jump()
        } else {
            0.0
        };
        let down = if self.down.rate() > 0.0 {
            self.down.rate() * self.down.mean_jump()
        } else {
            0.0
        };
        self.drift + up - down
    }

    /// `log E e^{θX₁}`.
    pub fn cumulant(&self, theta: f64) -> Result<f64> {
        let up = self.up.mgf(theta)? - self.up.rate();
        let down = self.down.mgf(-theta)? - self.down.rate();
        Ok(self.drift * theta + up + down)
    }

    /// Positive root `R` of `κ(R) = 0` when `E X₁ < 0`, if one exists.
    pub fn lundberg_root(&self) -> Option<f64> {
        if self.mean_x1() >= 0.0 || self.up.rate() == 0.0 && self.drift <= 0.0 {
            return None;
        }
        let (radius, closed) = if self.up.rate() == 0.0 {
            (f64::INFINITY, true)
        } else {
            self.up.moment_radius()
        };
        let admissible = |t: f64| t < radius || (closed && t == radius);
        let mut hi = 1.0;
        loop {
            if !admissible(hi) {
                hi = radius;
                if !closed {
                    hi = radius * (1.0 - 1e-12);
                }
                match self.cumulant(hi) {
                    Ok(v) if v > 0.0 => break,
                    _ => return None,
                }
            }
            match self.cumulant(hi) {
                Ok(v) if v > 0.0 => break,
                Ok(_) => hi *= 2.0,
                Err(_) => return None,
            }
            if hi > 1e9 {
                return None;
            }
        }
        let mut lo = 0.0;
        // κ < 0 just right of 0 and κ(hi) > 0.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cumulant(mid).ok()? <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Strictly stable process with index `γ` and positivity parameter `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSpec {
    index: f64,
    rho: f64,
    cplus: f64,
    cminus: f64,
}

impl StableSpec {
    pub fn new(index: f64, rho: f64, cplus: f64, cminus: f64) -> Result<Self> {
        if !(index > 0.0 && index < 2.0) {
            return Err(Error::config(format!(
                "stable index must lie in (0, 2), got {index}"
            )));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::config(format!(
                "positivity parameter must lie in (0, 1), got {rho}"
            )));
        }
        if !(cplus > 0.0) || !(cminus >= 0.0) {
            return Err(Error::config("stable process needs c⁺ > 0 and c⁻ ≥ 0"));
        }
        let (a, b) = (index * rho, index * (1.0 - rho));
        if !(a < 1.0 && b < 1.0) {
            return Err(Error::config(format!(
                "γρ = {a} and γ(1−ρ) = {b} must both lie in (0, 1)"
            )));
        }
        Ok(Self {
            index,
            rho,
            cplus,
            cminus,
        })
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cplus(&self) -> f64 {
        self.cplus
    }

    pub fn cminus(&self) -> f64 {
        self.cminus
    }

    /// Index `γρ` of the ascending ladder height subordinator.
    pub fn ascending_index(&self) -> f64 {
        self.index * self.rho
    }

    /// Index `γ(1−ρ)` of the descending ladder height subordinator.
    pub fn descending_index(&self) -> f64 {
        self.index * (1.0 - self.rho)
    }
}

/// A process paired with the exponential rate `α` of its ladder-height tail.
#[derive(Debug, Clone)]
pub struct AsymptoticRegime {
    alpha: f64,
    process: SpectrallyPositiveBV,
    diagnostic: TailDiagnostic,
    kappa_at_minus_alpha: f64,
}

impl AsymptoticRegime {
    /// Validates the standing assumptions: drift to `−∞` with upward jumps,
    /// an `S^(α)` ladder jump tail, and `q + ξ(−α) > 0`.
    pub fn new(alpha: f64, process: SpectrallyPositiveBV) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::config(format!("α must be positive, got {alpha}")));
        }
        if process.jumps().rate() == 0.0 {
            return Err(Error::Assumption {
                clause: "(i)",
                detail: "the jump measure has no mass on (0, ∞)".into(),
            });
        }
        process.require_drift_to_minus_infinity()?;
        let jumps = process.jumps();
        if jumps.check_tilt(alpha).is_err() {
            return Err(Error::Assumption {
                clause: "(ii)",
                detail: format!("∫ e^{{αy}} Π(dy) diverges at α = {alpha}"),
            });
        }
        let diagnostic = tail_ratio_diagnostic(
            jumps,
            alpha,
            &log_grid(10.0, 100.0, 12),
            DiagnosticOptions::default(),
        )?;
        if !diagnostic.consistent {
            return Err(Error::Assumption {
                clause: "(ii)",
                detail: format!("jump tail is not convolution-equivalent at α = {alpha}"),
            });
        }
        // q + ξ(−α) = c − ∫ e^{αy} Π̄(y) dy for this class.
        let kappa = process.drift_down() - jumps.tail_transform(alpha)?;
        if !(kappa > 0.0) {
            return Err(Error::Assumption {
                clause: "(iii)",
                detail: format!("q + ξ(−α) = {kappa} is not positive"),
            });
        }
        Ok(Self {
            alpha,
            process,
            diagnostic,
            kappa_at_minus_alpha: kappa,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn process(&self) -> &SpectrallyPositiveBV {
        &self.process
    }

    pub fn diagnostic(&self) -> &TailDiagnostic {
        &self.diagnostic
    }

    /// `q + ξ(−α)` as computed during validation.
    pub fn kappa_at_minus_alpha(&self) -> f64 {
        self.kappa_at_minus_alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_model() -> SpectrallyPositiveBV {
        SpectrallyPositiveBV::new(2.0, JumpMeasure::exponential(1.0, 1.0).unwrap()).unwrap()
    }

    fn tp_model() -> SpectrallyPositiveBV {
        SpectrallyPositiveBV::new(2.0, JumpMeasure::tilted_pareto(1.0, 1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn laplace_exponent_examples() {
        let p = exp_model();
        let psi = |b: f64| 2.0 * b - b / (1.0 + b);
        assert!((p.laplace_exponent(1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!((p.laplace_exponent(-0.5).unwrap() - psi(-0.5)).abs() < 1e-12);
        assert_eq!(p.laplace_exponent(0.0).unwrap(), 0.0);
        assert!(p.laplace_exponent(-1.0).is_err());
    }

    #[test]
    fn means() {
        assert!((exp_model().mean_x1() + 1.0).abs() < 1e-15);
        assert!((tp_model().mean_x1() + 1.596_34).abs() < 1e-4);
        let none =
            SpectrallyPositiveBV::new(3.0, JumpMeasure::exponential(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(none.mean_x1(), -3.0);
    }

    #[test]
    fn phi_inverse_examples() {
        let p = exp_model();
        assert_eq!(p.phi_inverse(0.0).unwrap(), 0.0);
        assert!((p.phi_inverse(1.5).unwrap() - 1.0).abs() < 1e-11);
        assert!(p.phi_inverse(-1.0).is_err());
        // Upward-drifting case: Φ(0) is the positive root of ψ.
        let up =
            SpectrallyPositiveBV::new(0.5, JumpMeasure::exponential(1.0, 1.0).unwrap()).unwrap();
        let r = up.phi_inverse(0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "{r}");
    }

    #[test]
    fn psi_is_convex_with_slope_minus_mean() {
        for p in [exp_model(), tp_model()] {
            let h = 1e-3;
            for k in 0..60 {
                let b = -0.9 + 0.1 * k as f64;
                let d2 = p.laplace_exponent(b + h).unwrap() - 2.0 * p.laplace_exponent(b).unwrap()
                    + p.laplace_exponent(b - h).unwrap();
                assert!(d2 / (h * h) >= -1e-8 * 1e6, "β={b}");
            }
            let eps = 1e-5;
            let slope = (p.laplace_exponent(eps).unwrap() - p.laplace_exponent(-eps).unwrap())
                / (2.0 * eps);
            assert!((slope + p.mean_x1()).abs() < 1e-6);
        }
    }

    #[test]
    fn regime_validation() {
        let r = AsymptoticRegime::new(1.0, tp_model()).unwrap();
        assert!((r.kappa_at_minus_alpha() - 1.0).abs() < 1e-10);
        match AsymptoticRegime::new(1.0, exp_model()) {
            Err(Error::Assumption { clause, .. }) => assert_eq!(clause, "(ii)"),
            other => panic!("{other:?}"),
        }
        // q + ξ(−1) = c − rate·∫(1+y)^{-2}dy = 0.45 − 0.5 while E X₁ < 0.
        let tight =
            SpectrallyPositiveBV::new(0.45, JumpMeasure::tilted_pareto(0.5, 1.0, 2.0).unwrap())
                .unwrap();
        match AsymptoticRegime::new(1.0, tight) {
            Err(Error::Assumption { clause, .. }) => assert_eq!(clause, "(iii)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lundberg_root_of_exponential_down_jumps() {
        // Drift 1, Exp(1) down jumps at rate 2: κ(θ) = θ − 2θ/(1+θ), root 1.
        let p = TwoSidedCPP::new(
            1.0,
            JumpMeasure::exponential(0.0, 1.0).unwrap(),
            JumpMeasure::exponential(2.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!((p.mean_x1() + 1.0).abs() < 1e-15);
        assert!((p.lundberg_root().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stable_spec_validation() {
        assert!(StableSpec::new(1.0, 0.5, 1.0, 1.0).is_ok());
        assert!(StableSpec::new(1.5, 0.8, 1.0, 1.0).is_err());
        assert!(StableSpec::new(1.0, 0.5, 0.0, 1.0).is_err());
        assert!(StableSpec::new(2.0, 0.5, 1.0, 1.0).is_err());
    }
}
