//! Empirical check of the convolution-equivalent tail class `S^(α)`.
//!
//! For `F ∈ S^(α)` one needs `F̄(u − x)/F̄(u) → e^{αx}`, a finite
//! `M = ∫ e^{αy} F(dy)`, and `F̄^{*2}(u)/F̄(u) → 2M`. All three are computed in
//! tilted form, `e^{αu} F̄(u)`, which stays representable for large `u`.

use super::JumpMeasure;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy)]
pub struct DiagnosticOptions {
    /// Shift `x` in the ratio `F̄(u − x)/F̄(u)`.
    pub shift: f64,
    /// Relative band for the limits over the top decade of the grid.
    pub band: f64,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            shift: 1.0,
            band: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TailDiagnostic {
    pub alpha: f64,
    pub shift: f64,
    pub u_grid: Vec<f64>,
    pub ratio_curve: Vec<f64>,
    pub target_ratio: f64,
    pub conv_ratio_curve: Vec<f64>,
    /// `∫ e^{αy} F(dy)`, infinite when the moment diverges.
    pub m_estimate: f64,
    /// First grid point where the tail underflowed, if any.
    pub truncated_at: Option<f64>,
    pub consistent: bool,
}

/// Evaluates the `S^(α)` limits of the jump law of `jumps` on `u_grid`.
pub fn tail_ratio_diagnostic(
    jumps: &JumpMeasure,
    alpha: f64,
    u_grid: &[f64],
    opts: DiagnosticOptions,
) -> Result<TailDiagnostic> {
    if u_grid.is_empty() || u_grid.iter().any(|u| !(u.is_finite() && *u > opts.shift)) {
        return Err(Error::config(
            "diagnostic grid must be nonempty with every point above the shift",
        ));
    }
    let m_estimate = if jumps.check_tilt(alpha).is_ok() {
        jumps.law_mgf(alpha)?
    } else {
        f64::INFINITY
    };
    let tol = Tolerance::new(1e-14, 1e-10);
    let mut ratio_curve = Vec::new();
    let mut conv_ratio_curve = Vec::new();
    let mut truncated_at = None;
    let target_ratio = (alpha * opts.shift).exp();
    for &u in u_grid {
        let t_u = jumps.law_tilted_tail(alpha, u);
        if t_u == 0.0 || !t_u.is_finite() {
            truncated_at = Some(u);
            break;
        }
        let t_shift = jumps.law_tilted_tail(alpha, u - opts.shift);
        ratio_curve.push(target_ratio * t_shift / t_u);
        // e^{αu} F̄*²(u) = T(u) + ∫₀^u T(u − y) e^{αy} f(y) dy with T the tilted tail.
        let inner = quad::integrate(
            |y| jumps.law_tilted_tail(alpha, u - y) * jumps.law_tilted_density(alpha, y),
            0.0,
            u,
            tol,
        )?;
        conv_ratio_curve.push((t_u + inner) / t_u);
    }
    let consistent = truncated_at.is_none()
        && m_estimate.is_finite()
        && top_decade_consistent(u_grid, &ratio_curve, target_ratio, opts.band)
        && top_decade_consistent(u_grid, &conv_ratio_curve, 2.0 * m_estimate, opts.band);
    Ok(TailDiagnostic {
        alpha,
        shift: opts.shift,
        u_grid: u_grid.to_vec(),
        ratio_curve,
        target_ratio,
        conv_ratio_curve,
        m_estimate,
        truncated_at,
        consistent,
    })
}

/// Within `band` of `target` over `u ≥ u_max/10`, and not drifting away.
fn top_decade_consistent(u_grid: &[f64], curve: &[f64], target: f64, band: f64) -> bool {
    let u_max = u_grid[u_grid.len() - 1];
    let devs: Vec<f64> = u_grid
        .iter()
        .zip(curve)
        .filter(|(u, _)| **u >= u_max / 10.0)
        .map(|(_, c)| (c / target - 1.0).abs())
        .collect();
    if devs.is_empty() {
        return false;
    }
    let within = devs.iter().all(|d| *d <= band);
    let settling = devs[devs.len() - 1] <= devs[0] + 1e-9;
    within && settling
}

/// `n` log-spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
