//! Ascending ladder height data: killing rate `q`, exponent `ξ`, ladder jump
//! measure `Π_H`, and the renewal measures `U` and `Û` on a grid.
//!
//! Local time is normalized so that the descending ladder height is a pure
//! unit drift. For `X = jumps − c·t` this gives `q = |E X₁|`,
//! `Û(dx) = dx`, `Π_H(dy) = Π̄_X(y) dy` and
//! `U = (1/c) Σ_{n≥0} ν^{*n}` with `ν(dx) = Π̄_X(x) dx / c`.

use std::io::Write;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::measures::{convolve, renewal_series, GridMeasure, JumpMeasure};
use crate::process::{SpectrallyPositiveBV, StableSpec};
use crate::quad::{self, Tolerance};

/// Grid resolution for renewal measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    pub length: f64,
}

impl GridSpec {
    pub fn new(step: f64, length: f64) -> Result<Self> {
        GridMeasure::node_count(step, length)?;
        Ok(Self { step, length })
    }
}

/// The ladder jump measure `Π_H`.
#[derive(Debug, Clone, PartialEq)]
pub enum LadderJumps {
    /// `Π̄_H(y) = ∫_y^∞ Π̄_X(z) dz`: the measure has density `Π̄_X`.
    Vigon(JumpMeasure),
    /// `Π_H` given directly.
    Direct(JumpMeasure),
}

impl LadderJumps {
    /// `Π̄_H(y)`.
    pub fn tail(&self, y: f64) -> f64 {
        match self {
            Self::Vigon(m) => m.integrated_tail(y),
            Self::Direct(m) => m.tail(y),
        }
    }

    /// Density of `Π_H`.
    pub fn density(&self, y: f64) -> f64 {
        match self {
            Self::Vigon(m) => m.tail(y),
            Self::Direct(m) => m.density(y),
        }
    }

    /// `e^{θy} Π̄_H(y)`.
    pub fn tilted_tail(&self, theta: f64, y: f64) -> f64 {
        match self {
            Self::Vigon(m) => m.tilted_integrated_tail(theta, y),
            Self::Direct(m) => m.tilted_tail(theta, y),
        }
    }

    /// `e^{θy}` times the density of `Π_H`.
    pub fn tilted_density(&self, theta: f64, y: f64) -> f64 {
        match self {
            Self::Vigon(m) => m.tilted_tail(theta, y),
            Self::Direct(m) => m.tilted_density(theta, y),
        }
    }

    /// Total mass `Π̄_H(0)`.
    pub fn mass(&self) -> f64 {
        self.tail(0.0)
    }

    pub fn check_tilt(&self, theta: f64) -> Result<()> {
        match self {
            Self::Vigon(m) | Self::Direct(m) => m.check_tilt(theta),
        }
    }

    /// `∫₀^∞ e^{θy} Π̄_H(y) dy`.
    pub fn tail_transform(&self, theta: f64) -> Result<f64> {
        match self {
            Self::Vigon(m) => {
                m.check_tilt(theta)?;
                if m.rate() == 0.0 {
                    return Ok(0.0);
                }
                quad::integrate_to_infinity(
                    |y| m.tilted_integrated_tail(theta, y),
                    0.0,
                    Tolerance::new(1e-15, 1e-13),
                )
            }
            Self::Direct(m) => m.tail_transform(theta),
        }
    }

    /// `∫ e^{θy} Π_H(dy)`.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        Ok(self.mass() + theta * self.tail_transform(theta)?)
    }
}

/// Ladder data on a grid over `[0, L]`.
#[derive(Debug, Clone)]
pub struct LadderData {
    q: f64,
    drift_h: f64,
    pi_h: LadderJumps,
    u: GridMeasure,
    uhat: GridMeasure,
    tilt: f64,
    series_terms: usize,
}

impl LadderData {
    /// Killing rate of the ascending ladder height.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn drift_h(&self) -> f64 {
        self.drift_h
    }

    pub fn pi_h(&self) -> &LadderJumps {
        &self.pi_h
    }

    /// Ascending renewal measure `U` on the grid.
    pub fn u(&self) -> &GridMeasure {
        &self.u
    }

    /// Descending renewal measure `Û` on the grid.
    pub fn uhat(&self) -> &GridMeasure {
        &self.uhat
    }

    /// Exponential tilt used while summing the renewal series.
    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn series_terms(&self) -> usize {
        self.series_terms
    }

    pub fn step(&self) -> f64 {
        self.u.step()
    }

    pub fn length(&self) -> f64 {
        self.u.length()
    }

    /// `Π̄_H(y)`.
    pub fn pi_h_tail(&self, y: f64) -> f64 {
        self.pi_h.tail(y)
    }

    /// `ξ(β) = d_H β + ∫(1 − e^{−βy}) Π_H(dy)`, integrated against `Π̄_H`.
    pub fn xi(&self, beta: f64) -> Result<f64> {
        if beta == 0.0 {
            return Ok(0.0);
        }
        Ok(self.drift_h * beta + beta * self.pi_h.tail_transform(-beta)?)
    }

    /// `κ(0, β) = q + ξ(β)`.
    pub fn kappa(&self, beta: f64) -> Result<f64> {
        Ok(self.q + self.xi(beta)?)
    }

    /// `q + ξ(−α)`, failing unless it is positive.
    pub fn kappa_at_minus(&self, alpha: f64) -> Result<f64> {
        let k = self.kappa(-alpha).map_err(|e| Error::Assumption {
            clause: "(iii)",
            detail: format!("q + ξ(−α) is undefined at α = {alpha}: {e}"),
        })?;
        if k > 0.0 {
            Ok(k)
        } else {
            Err(Error::Assumption {
                clause: "(iii)",
                detail: format!("q + ξ(−α) = {k} is not positive at α = {alpha}"),
            })
        }
    }

    /// `U(u, ∞)·(q + ξ(−α))² / Π̄_H(u)`, which tends to one as `u → ∞`.
    pub fn tail_equivalence_ratio(&self, alpha: f64, u: f64) -> Result<f64> {
        let k = self.kappa_at_minus(alpha)?;
        Ok(self.u.tail(u) * k * k / self.pi_h.tail(u))
    }

    /// Ladder data from `q`, `d_H` and `Π_H` directly, with `Û` Lebesgue.
    ///
    /// `U` is the potential of the subordinator killed at rate `q`. With a
    /// positive drift it is `Σ (E * Π_H)^{*n} * E` for the exponential
    /// holding law `E(dx) = d⁻¹ e^{−(q+m)x/d} dx`, `m = Π_H` mass.
    pub fn synthetic(
        q: f64,
        drift_h: f64,
        pi_h: JumpMeasure,
        grid: GridSpec,
        tilt: f64,
    ) -> Result<Self> {
        if !(q > 0.0) || !(drift_h >= 0.0) {
            return Err(Error::config("synthetic ladder needs q > 0 and d_H ≥ 0"));
        }
        pi_h.check_tilt(tilt)?;
        let m = pi_h.rate();
        let (h, len) = (grid.step, grid.length);
        let kernel_h = GridMeasure::from_density(h, len, |y| pi_h.density(y))?.tilt(tilt)?;
        let (u_tilted, terms) = if drift_h > 0.0 {
            let rate = (q + m) / drift_h;
            let hold =
                GridMeasure::from_density(h, len, |x| (-rate * x).exp() / drift_h)?.tilt(tilt)?;
            let n = hold.len();
            let kernel = convolve(&hold, &kernel_h)?.truncated(n);
            let (series, terms) = renewal_series(&kernel, 1.0, kernel.mass())?;
            (convolve(&series, &hold)?.truncated(n), terms)
        } else {
            let kernel = kernel_h.scaled(1.0 / (q + m));
            renewal_series(&kernel, 1.0 / (q + m), kernel.mass())?
        };
        Ok(Self {
            q,
            drift_h,
            pi_h: LadderJumps::Direct(pi_h),
            u: u_tilted.tilt(-tilt)?,
            uhat: GridMeasure::from_density(h, len, |_| 1.0)?,
            tilt,
            series_terms: terms,
        })
    }

    /// Writes `x, U[0,x], Π̄_H(x)` at every grid node.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "U_cumulative", "piH_tail"])?;
        for k in 0..self.u.len() {
            let x = self.u.node(k);
            wtr.write_record([
                format!("{x}"),
                format!("{:e}", self.u.cumulative(x)),
                format!("{:e}", self.pi_h.tail(x)),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Ladder data of `X = jumps − c·t` with no tilt.
pub fn build_ladder(p: &SpectrallyPositiveBV, grid: GridSpec) -> Result<LadderData> {
    build_ladder_tilted(p, grid, 0.0)
}

/// Ladder data of `X = jumps − c·t`, summing the renewal series under the
/// exponential tilt `e^{θx}` so that far-tail values keep relative accuracy.
pub fn build_ladder_tilted(
    p: &SpectrallyPositiveBV,
    grid: GridSpec,
    theta: f64,
) -> Result<LadderData> {
    let c = p.drift_down();
    let jumps = p.jumps();
    let r = jumps.tail_transform(0.0)? / c;
    if r >= 1.0 {
        return Err(Error::Assumption {
            clause: "(i)",
            detail: format!("ν has mass {r} ≥ 1, which violates drift to −∞"),
        });
    }
    if theta < 0.0 {
        return Err(Error::config("renewal tilt must be nonnegative"));
    }
    jumps.check_tilt(theta)?;
    let nu =
        GridMeasure::from_density(grid.step, grid.length, |x| jumps.tail(x) / c)?.tilt(theta)?;
    let r_theta = nu.mass();
    if r_theta >= 1.0 {
        return Err(Error::domain(format!(
            "tilted kernel mass {r_theta} ≥ 1 at θ = {theta}"
        )));
    }
    let (u_tilted, terms) = renewal_series(&nu, 1.0 / c, r_theta)?;
    Ok(LadderData {
        q: -p.mean_x1(),
        drift_h: 0.0,
        pi_h: pi_h_via_vigon(p),
        u: u_tilted.tilt(-theta)?,
        uhat: GridMeasure::from_density(grid.step, grid.length, |_| 1.0)?,
        tilt: theta,
        series_terms: terms,
    })
}

/// `Π_H` with `Π̄_H(y) = ∫_y^∞ Π̄_X(z) dz`.
pub fn pi_h_via_vigon(p: &SpectrallyPositiveBV) -> LadderJumps {
    LadderJumps::Vigon(p.jumps().clone())
}

/// `ξ(β) = ∫₀^∞ (1 − e^{−βy}) Π̄_X(y) dy`, from the process directly.
pub fn xi(p: &SpectrallyPositiveBV, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Ok(0.0);
    }
    let j = p.jumps();
    Ok(j.tail_transform(0.0)? - j.tail_transform(-beta)?)
}

/// `(∫ e^{−βx} U(dx), β/ψ(β))`.
pub fn laplace_u_check(
    ladder: &LadderData,
    p: &SpectrallyPositiveBV,
    beta: f64,
) -> Result<(f64, f64)> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("β must be positive, got {beta}")));
    }
    Ok((
        ladder.u().exp_moment(-beta)?,
        beta / p.laplace_exponent(beta)?,
    ))
}

/// Grid value of `∫ e^{αx} U(dx)` next to its closed form `1/(q + ξ(−α))`.
#[derive(Debug, Clone, Copy)]
pub struct MgfCheck {
    pub grid: f64,
    pub closed_form: f64,
}

impl MgfCheck {
    pub fn agrees(&self, tol: f64) -> bool {
        (self.grid - self.closed_form).abs() <= tol * self.closed_form.abs().max(1.0)
    }
}

/// The Stieltjes transform `∫ e^{αx} U(dx)`; it equals `1/(q + ξ(−α))`.
pub fn mgf_u_alpha(ladder: &LadderData, alpha: f64) -> Result<MgfCheck> {
    let closed_form = if alpha == 0.0 {
        1.0 / ladder.q()
    } else {
        1.0 / ladder.kappa_at_minus(alpha)?
    };
    Ok(MgfCheck {
        grid: ladder.u().exp_moment(alpha)?,
        closed_form,
    })
}

/// Renewal densities of a strictly stable process:
/// `U(dx) = x^{γρ−1}/Γ(γρ) dx` and `Û(dx) = x^{γ(1−ρ)−1}/Γ(γ(1−ρ)) dx`.
#[derive(Debug, Clone, Copy)]
pub struct StableRenewal {
    up: f64,
    down: f64,
    gamma_up: f64,
    gamma_down: f64,
}

impl StableRenewal {
    pub fn u_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x.powf(self.up - 1.0) / self.gamma_up
        }
    }

    pub fn uhat_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x.powf(self.down - 1.0) / self.gamma_down
        }
    }
}

pub fn stable_renewal(s: &StableSpec) -> StableRenewal {
    let (up, down) = (s.ascending_index(), s.descending_index());
    StableRenewal {
        up,
        down,
        gamma_up: gamma(up),
        gamma_down: gamma(down),
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

    fn exp_grid() -> GridSpec {
        GridSpec::new(1.0 / 1024.0, 48.0).unwrap()
    }

    #[test]
    fn exponential_model_renewal_measure() {
        let p = exp_model();
        let l = build_ladder(&p, exp_grid()).unwrap();
        assert!((l.q() - 1.0).abs() < 1e-12);
        assert!((l.u().atom0() - 0.5).abs() < 1e-15);
        let (lhs, rhs) = laplace_u_check(&l, &p, 1.0).unwrap();
        assert!((rhs - 2.0 / 3.0).abs() < 1e-12);
        assert!((lhs - rhs).abs() < 1e-6, "{lhs}");
        // U(x, ∞) = ½ e^{−x/2}.
        for x in [0.5, 2.0, 10.0] {
            assert!((l.u().tail(x) - 0.5 * (-x / 2.0f64).exp()).abs() < 1e-6);
        }
        assert!((l.q() * l.u().mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_jumps_gives_atom_only() {
        let p =
            SpectrallyPositiveBV::new(2.0, JumpMeasure::exponential(0.0, 1.0).unwrap()).unwrap();
        let l = build_ladder(&p, GridSpec::new(0.1, 5.0).unwrap()).unwrap();
        assert_eq!(l.q(), 2.0);
        assert_eq!(l.u().atom0(), 0.5);
        assert_eq!(l.u().mass(), 0.5);
    }

    #[test]
    fn supercritical_kernel_rejected() {
        let p =
            SpectrallyPositiveBV::new(0.5, JumpMeasure::exponential(1.0, 1.0).unwrap()).unwrap();
        assert!(build_ladder(&p, exp_grid()).is_err());
    }

    #[test]
    fn xi_examples_and_routes() {
        let e = exp_model();
        assert!((xi(&e, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(xi(&e, 0.0).unwrap(), 0.0);
        let tp = tp_model();
        let q = -tp.mean_x1();
        assert!((q + xi(&tp, -1.0).unwrap() - 1.0).abs() < 1e-10);
        let l = build_ladder(&tp, GridSpec::new(0.125, 16.0).unwrap()).unwrap();
        for beta in [-1.0, -0.5, 0.3, 1.0, 4.0] {
            let a = xi(&tp, beta).unwrap();
            let b = l.xi(beta).unwrap();
            assert!(
                (a - b).abs() < 1e-8 * a.abs().max(1.0),
                "β={beta}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn kappa_factorizes_laplace_exponent() {
        for p in [exp_model(), tp_model()] {
            let l = build_ladder(&p, GridSpec::new(0.25, 8.0).unwrap()).unwrap();
            for beta in [-0.9, -0.3, 0.1, 0.7, 2.0, 10.0] {
                let lhs = l.kappa(beta).unwrap() * beta;
                let rhs = p.laplace_exponent(beta).unwrap();
                assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs(), "β={beta}");
            }
        }
    }

    #[test]
    fn vigon_tail_of_exponential() {
        let pi = pi_h_via_vigon(&exp_model());
        for y in [0.0, 1.0, 3.0] {
            assert!((pi.tail(y) - (-y).exp()).abs() < 1e-14);
        }
        let tp = pi_h_via_vigon(&tp_model());
        assert!((tp.mass() - tp_model().jumps().mean_jump()).abs() < 1e-12);
    }

    #[test]
    fn series_matches_lattice_recursion() {
        // U_k = δ_{k0}/c + Σ_{j≤k} ν_j U_{k−j} on the lattice.
        let p = tp_model();
        let grid = GridSpec::new(0.05, 10.0).unwrap();
        let l = build_ladder(&p, grid).unwrap();
        let c = p.drift_down();
        let nu =
            GridMeasure::from_density(grid.step, grid.length, |x| p.jumps().tail(x) / c).unwrap();
        let nm = nu.node_masses();
        let n = nm.len();
        let mut u = vec![0.0; n];
        for k in 0..n {
            let mut s = if k == 0 { 1.0 / c } else { 0.0 };
            for j in 1..=k {
                s += nm[j] * u[k - j];
            }
            u[k] = s / (1.0 - nm[0]);
        }
        for k in [0, 1, 7, 50, 199] {
            let want = u[k];
            let got = l.u().node_mass(k);
            assert!((got - want).abs() < 1e-12, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn tilted_series_agrees_with_plain() {
        let p = tp_model();
        let grid = GridSpec::new(0.0625, 40.0).unwrap();
        let plain = build_ladder(&p, grid).unwrap();
        let tilted = build_ladder_tilted(&p, grid, 1.0).unwrap();
        for x in [0.0, 1.0, 5.0, 20.0] {
            let (a, b) = (plain.u().tail(x), tilted.u().tail(x));
            assert!((a - b).abs() < 1e-10 * a + 1e-12, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn mgf_at_alpha_for_tilted_pareto() {
        let p = tp_model();
        let l = build_ladder_tilted(&p, GridSpec::new(1.0 / 32.0, 512.0).unwrap(), 1.0).unwrap();
        let m = mgf_u_alpha(&l, 1.0).unwrap();
        assert!((m.closed_form - 1.0).abs() < 1e-8);
        assert!(m.agrees(5e-3), "{m:?}");
        let m0 = mgf_u_alpha(&l, 0.0).unwrap();
        assert!((m0.closed_form - 1.0 / l.q()).abs() < 1e-15);
        let e = build_ladder(&exp_model(), GridSpec::new(0.25, 8.0).unwrap()).unwrap();
        assert!(matches!(
            mgf_u_alpha(&e, 1.5),
            Err(Error::Assumption { .. })
        ));
    }

    #[test]
    fn synthetic_ladder_with_drift_inverts_kappa() {
        // κ(β) = q + dβ + mβ/(μ+β) for Π_H = m·Exp(μ).
        let (q, d) = (0.5, 0.8);
        let pi = JumpMeasure::exponential(1.2, 2.0).unwrap();
        for tilt in [0.0, 0.2] {
            let l = LadderData::synthetic(
                q,
                d,
                pi.clone(),
                GridSpec::new(1.0 / 512.0, 40.0).unwrap(),
                tilt,
            )
            .unwrap();
            for beta in [0.5, 1.0, 3.0] {
                let kappa = q + d * beta + 1.2 * beta / (2.0 + beta);
                assert!((l.kappa(beta).unwrap() - kappa).abs() < 1e-12);
                let lt = l.u().exp_moment(-beta).unwrap();
                assert!(
                    (lt - 1.0 / kappa).abs() < 1e-5,
                    "β={beta}: {lt} vs {}",
                    1.0 / kappa
                );
            }
        }
    }

    #[test]
    fn synthetic_ladder_without_drift() {
        let pi = JumpMeasure::exponential(1.0, 1.0).unwrap();
        let l = LadderData::synthetic(1.0, 0.0, pi, GridSpec::new(1.0 / 512.0, 40.0).unwrap(), 0.0)
            .unwrap();
        assert!((l.u().atom0() - 0.5).abs() < 1e-15);
        let kappa = 1.0 + 1.0 / 2.0;
        assert!((l.u().exp_moment(-1.0).unwrap() - 1.0 / kappa).abs() < 1e-6);
    }

    #[test]
    fn stable_densities() {
        let r = stable_renewal(&StableSpec::new(1.0, 0.5, 1.0, 1.0).unwrap());
        let x: f64 = 2.0;
        let want = x.powf(-0.5) / std::f64::consts::PI.sqrt();
        assert!((r.u_density(x) - want).abs() < 1e-14);
        assert!((r.uhat_density(x) - want).abs() < 1e-14);
        let s = stable_renewal(&StableSpec::new(1.2, 0.3, 1.0, 1.0).unwrap());
        let t = stable_renewal(&StableSpec::new(1.2, 0.7, 1.0, 1.0).unwrap());
        assert!((s.u_density(1.7) - t.uhat_density(1.7)).abs() < 1e-15);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let l = build_ladder(&exp_model(), GridSpec::new(0.5, 2.0).unwrap()).unwrap();
        let mut out = Vec::new();
        l.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("x,U_cumulative,piH_tail\n"));
        assert_eq!(text.lines().count(), 1 + l.u().len());
    }
}
