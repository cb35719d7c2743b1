//! Triple law at first passage for strictly stable processes:
//! `C (x−y)^{γρ−1} (v−y)^{γ(1−ρ)−1} (v+u)^{−1−γ}` on `u > 0, v ≥ y, 0 ≤ y ≤ x`.

use statrs::function::gamma::gamma;

use crate::error::Result;
use crate::process::StableSpec;
use crate::quad::{self, Tolerance};

/// `C = sin(πγρ)/π · Γ(γ+1) / (Γ(γρ) Γ(γ(1−ρ)))`.
pub fn stable_norm_const(s: &StableSpec) -> f64 {
    let (g, a, b) = (s.index(), s.ascending_index(), s.descending_index());
    (std::f64::consts::PI * a).sin() / std::f64::consts::PI * gamma(g + 1.0) / (gamma(a) * gamma(b))
}

pub fn triple_law_stable(s: &StableSpec, x: f64, u: f64, v: f64, y: f64) -> f64 {
    if !(u > 0.0 && y >= 0.0 && y < x && v > y) {
        return 0.0;
    }
    let (g, a, b) = (s.index(), s.ascending_index(), s.descending_index());
    stable_norm_const(s) * (x - y).powf(a - 1.0) * (v - y).powf(b - 1.0) * (v + u).powf(-1.0 - g)
}

/// Total mass of the triple law over its support, by quadrature.
///
/// With `∫(v+u)^{−1−γ} du = v^{−γ}/γ`-type scaling, `v = y/t` and `y = x·s`,
/// the triple integral factors into three integrals over `[0, 1]`:
/// `∫ s^{γ−1} ds`, `∫ t^{a−1}(1−t)^{b−1} dt` and `∫ s^{−a}(1−s)^{a−1} ds`,
/// each evaluated numerically. The mass does not depend on `x > 0`.
pub fn stable_triple_mass(s: &StableSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(crate::Error::Domain(format!(
            "level must be positive, got {x}"
        )));
    }
    let (g, a, b) = (s.index(), s.ascending_index(), s.descending_index());
    // u: 1 + u/v = 1/r.
    let over_u = unit_beta(g, 1.0)?;
    // v: v = y/t, leaving y^{−a} times a constant.
    let over_v = unit_beta(a, b)?;
    // y: y = x·s, the powers of x cancel.
    let over_y = unit_beta(1.0 - a, a)?;
    Ok(stable_norm_const(s) * over_u * over_v * over_y)
}

/// `∫₀¹ t^{p−1} (1−t)^{q−1} dt` by quadrature, split at `½` with
/// `t = ½ r^{1/p}` and `1 − t = ½ r^{1/q}` removing the endpoint powers.
fn unit_beta(p: f64, q: f64) -> Result<f64> {
    let tol = Tolerance::new(1e-15, 1e-12);
    let left = quad::integrate(
        |r| 0.5f64.powf(p) / p * (1.0 - 0.5 * r.powf(1.0 / p)).powf(q - 1.0),
        0.0,
        1.0,
        tol,
    )?;
    let right = quad::integrate(
        |r| 0.5f64.powf(q) / q * (1.0 - 0.5 * r.powf(1.0 / q)).powf(p - 1.0),
        0.0,
        1.0,
        tol,
    )?;
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_constant() {
        let s = StableSpec::new(1.0, 0.5, 1.0, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        assert!((stable_norm_const(&s) - 1.0 / (pi * pi)).abs() < 1e-12);
    }

    #[test]
    fn support() {
        let s = StableSpec::new(1.0, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(triple_law_stable(&s, 1.0, 1.0, 0.2, 0.5), 0.0);
        assert_eq!(triple_law_stable(&s, 1.0, 1.0, 2.0, 1.5), 0.0);
        assert!(triple_law_stable(&s, 1.0, 1.0, 2.0, 0.5) > 0.0);
    }

    #[test]
    fn normalizes() {
        let s = StableSpec::new(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!((stable_triple_mass(&s, 1.0).unwrap() - 1.0).abs() < 1e-3);
    }
}
