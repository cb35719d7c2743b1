//! Limits of the passage laws as the level tends to infinity, conditioned on
//! passage, in the regime where `Π̄_H` is convolution equivalent with index `α`.
//!
//! Passage then happens in one of three ways: a large jump from near the
//! running minimum (mass `(−ξ(−α) − α d_H)/q`), a jump of ordinary size after
//! the path has drifted close to the level (mass `(q + ξ(−α))/q`), or by
//! creeping (mass `α d_H / q`).

use super::DefectiveLaw;
use crate::error::{Error, Result};
use crate::ladder::LadderData;
use crate::measures::GridMeasure;
use crate::process::{AsymptoticRegime, SpectrallyPositiveBV};
use crate::quad::{self, Tolerance};

fn tol() -> Tolerance {
    Tolerance::new(1e-15, 1e-12)
}

#[derive(Debug, Clone)]
pub struct AsymptoticLaws<'a> {
    ladder: &'a LadderData,
    process: Option<&'a SpectrallyPositiveBV>,
    alpha: f64,
    kappa: f64,
    u_tilted: GridMeasure,
}

/// Split of `Ḡ(u)` into its jump and drift-in parts.
#[derive(Debug, Clone, Copy)]
pub struct Decomposition {
    pub comp_jump: f64,
    pub comp_drift_in: f64,
    pub sum: f64,
    pub gbar: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MassAccounting {
    pub large_jump: f64,
    pub drift_in: f64,
    pub atom: f64,
    pub total: f64,
}

impl<'a> AsymptoticLaws<'a> {
    /// Laws built from ladder data alone; `q + ξ(−α) > 0` is checked here.
    pub fn new(ladder: &'a LadderData, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::config(format!("α must be positive, got {alpha}")));
        }
        let kappa = ladder.kappa_at_minus(alpha)?;
        Ok(Self {
            ladder,
            process: None,
            alpha,
            kappa,
            u_tilted: ladder.u().tilt(alpha)?,
        })
    }

    /// Laws for a validated regime, with access to `Π_X` for the joint forms.
    pub fn for_regime(regime: &'a AsymptoticRegime, ladder: &'a LadderData) -> Result<Self> {
        let mut laws = Self::new(ladder, regime.alpha())?;
        laws.process = Some(regime.process());
        Ok(laws)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `q + ξ(−α)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn q(&self) -> f64 {
        self.ladder.q()
    }

    fn process(&self) -> Result<&'a SpectrallyPositiveBV> {
        self.process
            .ok_or_else(|| Error::config("this law needs the jump measure of X"))
    }

    /// `Ḡ(u) = e^{−αu}/q · (q + ξ(−α) + ∫_{(u,∞)} (e^{αy} − e^{αu}) Π_H(dy))`.
    pub fn gbar(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Ok(1.0);
        }
        let a = self.alpha;
        let pi = self.ladder.pi_h();
        let scale = (-a * u).exp();
        // e^{−αu}(e^{αy} − e^{αu}) π_H(y) with y = u + s.
        let jump = quad::integrate_to_infinity(
            |s| {
                if a * s < 500.0 {
                    pi.density(u + s) * (a * s).exp_m1()
                } else {
                    scale * pi.tilted_density(a, u + s) - pi.density(u + s)
                }
            },
            0.0,
            tol(),
        )?;
        Ok(scale * self.kappa / self.q() + jump / self.q())
    }

    /// Density in `u` of the large-jump limit, `(α/q) ∫₀^∞ e^{αy} π_H(u + y) dy`.
    pub fn large_jump_marginal_u(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Ok(0.0);
        }
        let a = self.alpha;
        let pi = self.ladder.pi_h();
        let inner = quad::integrate_to_infinity(|y| pi.tilted_density(a, u + y), 0.0, tol())?;
        Ok(a / self.q() * (-a * u).exp() * inner)
    }

    /// Density in `u` of the drift-in limit, `α e^{−αu} (q + ξ(−α))/q`.
    pub fn drift_in_marginal_u(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        self.alpha * (-self.alpha * u).exp() * self.kappa / self.q()
    }

    pub fn large_jump_marginal_law(&self) -> DefectiveLaw<'_> {
        let mass = (-(self.kappa - self.q()) - self.alpha * self.ladder.drift_h()) / self.q();
        DefectiveLaw::new(&["u"], mass, move |u| {
            self.large_jump_marginal_u(u).unwrap_or(f64::NAN)
        })
    }

    pub fn drift_in_marginal_law(&self) -> DefectiveLaw<'_> {
        DefectiveLaw::new(&["u"], self.kappa / self.q(), move |u| {
            self.drift_in_marginal_u(u)
        })
    }

    /// Large-jump limit in `(u, v, y)` measured from the level:
    /// `(α/q) e^{αy} Π_X(du + v) dv dy` on `v ≥ y ≥ 0`, with `Û` Lebesgue.
    pub fn large_jump_law(&self, u: f64, v: f64, y: f64) -> Result<f64> {
        let jumps = self.process()?.jumps();
        if !(u > 0.0 && y >= 0.0 && v >= y) {
            return Ok(0.0);
        }
        let a = self.alpha;
        Ok(a / self.q() * (a * (y - u - v)).exp() * jumps.tilted_density(a, u + v))
    }

    /// Drift-in limit in `(u, φ, θ)` as a density against `U(dθ) dφ du`:
    /// `α (q + ξ(−α))² ξ̂(α)/q · e^{−α(u−φ)}` on `φ ≤ θ`, with `ξ̂(α) = α`.
    pub fn drift_in_kernel(&self, u: f64, phi: f64, theta: f64) -> f64 {
        if !(u > 0.0 && theta >= 0.0 && phi <= theta) {
            return 0.0;
        }
        let a = self.alpha;
        a * a * self.kappa * self.kappa / self.q() * (-a * (u - phi)).exp()
    }

    /// Drift-in limit as a Lebesgue density in `(u, φ, θ)` for `θ > 0`.
    pub fn drift_in_law(&self, u: f64, phi: f64, theta: f64) -> f64 {
        self.ladder.u().density_at(theta) * self.drift_in_kernel(u, phi, theta)
    }

    /// Drift-in limit on the atom `θ = 0` of `U`, as a density in `(u, φ)`.
    pub fn drift_in_law_atom(&self, u: f64, phi: f64) -> f64 {
        self.ladder.u().atom0() * self.drift_in_kernel(u, phi, 0.0)
    }

    /// The two components of `Ḡ(u)` computed from the marginals, and `Ḡ(u)`.
    pub fn decomposition_check(&self, u: f64) -> Result<Decomposition> {
        let a = self.alpha;
        let pi = self.ladder.pi_h();
        let u = u.max(0.0);
        // ∫_u^∞ of the large-jump density, integrated by parts: (α/q) ∫₀^∞ e^{αy} Π̄_H(u + y) dy.
        let inner = quad::integrate_to_infinity(|y| pi.tilted_tail(a, u + y), 0.0, tol())?;
        let comp_jump = a / self.q() * (-a * u).exp() * inner;
        let comp_drift_in = (-a * u).exp() * self.kappa / self.q();
        let sum = comp_jump + comp_drift_in;
        let gbar = self.gbar(u)?;
        Ok(Decomposition {
            comp_jump,
            comp_drift_in,
            sum,
            gbar,
        })
    }

    /// `α d_H / q`.
    pub fn creeping_atom(&self) -> f64 {
        self.alpha * self.ladder.drift_h() / self.q()
    }

    /// `lim P(X̄_{τ⁺−} ≤ z | τ⁺ < ∞) = ((q + ξ(−α))²/q) ∫_{[0,z]} e^{αθ} U(dθ)`.
    pub fn last_max_asymptotic(&self, z: f64) -> f64 {
        self.kappa * self.kappa / self.q() * self.u_tilted.cumulative(z)
    }

    /// Masses of the three passage mechanisms by quadrature of the marginals.
    pub fn mass_accounting(&self) -> Result<MassAccounting> {
        let loose = Tolerance::new(1e-14, 1e-10);
        let large_jump = quad::integrate_to_infinity(
            |u| self.large_jump_marginal_u(u).unwrap_or(f64::NAN),
            0.0,
            loose,
        )?;
        let drift_in = quad::integrate_to_infinity(|u| self.drift_in_marginal_u(u), 0.0, loose)?;
        let atom = self.creeping_atom();
        let total = large_jump + drift_in + atom;
        if (total - 1.0).abs() > 1e-6 || !total.is_finite() {
            return Err(Error::MassAccounting {
                large_jump,
                drift_in,
                atom,
                total,
            });
        }
        Ok(MassAccounting {
            large_jump,
            drift_in,
            atom,
            total,
        })
    }

    /// `(α/|E X₁|) e^{αy} Π_X(du + v) dv dy`.
    pub fn insurance_large_jump(&self, u: f64, v: f64, y: f64) -> Result<f64> {
        let p = self.process()?;
        if !(u > 0.0 && y >= 0.0 && v >= y) {
            return Ok(0.0);
        }
        let a = self.alpha;
        Ok(a / -p.mean_x1() * (a * (y - u - v)).exp() * p.jumps().tilted_density(a, u + v))
    }

    /// `(ψ(−α)²/|E X₁|) e^{−α(u−φ)}` against `U(dθ) dφ du`.
    pub fn insurance_drift_in_kernel(&self, u: f64, phi: f64, theta: f64) -> Result<f64> {
        let p = self.process()?;
        if !(u > 0.0 && theta >= 0.0 && phi <= theta) {
            return Ok(0.0);
        }
        let psi = p.laplace_exponent(-self.alpha)?;
        Ok(psi * psi / -p.mean_x1() * (-self.alpha * (u - phi)).exp())
    }

    /// `(ψ(−α)²/|E X₁|, α²(q + ξ(−α))²/q)`.
    pub fn insurance_constants(&self) -> Result<(f64, f64)> {
        let p = self.process()?;
        let psi = p.laplace_exponent(-self.alpha)?;
        let a = self.alpha;
        Ok((
            psi * psi / -p.mean_x1(),
            a * a * self.kappa * self.kappa / self.q(),
        ))
    }
}
