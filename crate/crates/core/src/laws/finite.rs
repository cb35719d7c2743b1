//! Joint law of overshoot, undershoot and last-maximum undershoot at first
//! passage over a fixed level for `X = jumps − c·t`.
//!
//! With `z = x − y` the pre-passage maximum,
//! `P(u ∈ du, v ∈ dv, y ∈ dy, τ⁺_x < ∞) = U(x − dy) Π_X(du + v) dv` on
//! `u > 0, v ≥ y, 0 ≤ y ≤ x`. Conditional versions divide by `q U(x, ∞)`.

use crate::error::{Error, Result};
use crate::ladder::LadderData;
use crate::measures::GridMeasure;
use crate::process::SpectrallyPositiveBV;
use crate::quad;

/// `P(τ⁺_x < ∞) = q U(x, ∞)`.
pub fn pollaczek_khintchine(ladder: &LadderData, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::domain(format!("level must be ≥ 0, got {x}")));
    }
    if x > ladder.length() {
        return Err(Error::domain(format!(
            "level {x} lies beyond the renewal grid [0, {}]",
            ladder.length()
        )));
    }
    Ok(ladder.q() * ladder.u().tail(x))
}

/// Finite-level passage law over the barrier `x`.
#[derive(Debug, Clone)]
pub struct PassageLaw<'a> {
    ladder: &'a LadderData,
    process: &'a SpectrallyPositiveBV,
    x: f64,
    passage: f64,
    /// Law of the pre-passage maximum `x − y` on `[0, x]`, unnormalized.
    maximum: GridMeasure,
    /// `Π̄_H` at grid nodes.
    pi_h_nodes: Vec<f64>,
    /// Unnormalized `P(v ≤ m·h)` for `m ≤ K`.
    undershoot_cdf: Vec<f64>,
    barrier_node: usize,
}

impl<'a> PassageLaw<'a> {
    pub fn new(ladder: &'a LadderData, process: &'a SpectrallyPositiveBV, x: f64) -> Result<Self> {
        let passage = pollaczek_khintchine(ladder, x)?;
        if passage <= 0.0 {
            return Err(Error::domain(format!(
                "passage over {x} has probability zero"
            )));
        }
        let h = ladder.step();
        let k_bar = (x / h).round() as usize;
        if ((k_bar as f64) * h - x).abs() > 1e-9 * h.max(x) {
            return Err(Error::config(format!(
                "barrier {x} is not a node of the grid with step {h}"
            )));
        }
        let u = ladder.u();
        let n = u.len();
        let pi_h_nodes: Vec<f64> = (0..n).map(|k| ladder.pi_h_tail(k as f64 * h)).collect();
        let mut max_masses: Vec<f64> = (0..=k_bar)
            .map(|k| u.node_mass(k) * pi_h_nodes[k_bar - k])
            .collect();
        if k_bar > 0 {
            max_masses[k_bar] *= 0.5;
        }
        let atom = u.atom0() * pi_h_nodes[k_bar];
        max_masses[0] -= atom;
        let maximum = GridMeasure::from_node_masses(h, atom, &max_masses)?;

        let jumps = process.jumps();
        let u_x = u.cumulative(x);
        let window = |v: f64| {
            if v >= x {
                u_x
            } else {
                u_x - u.cumulative(x - v)
            }
        };
        let mut undershoot_cdf = vec![0.0; k_bar + 1];
        for m in 1..=k_bar {
            let (a, b) = ((m - 1) as f64 * h, m as f64 * h);
            undershoot_cdf[m] =
                undershoot_cdf[m - 1] + quad::gauss_legendre8(|v| jumps.tail(v) * window(v), a, b);
        }
        Ok(Self {
            ladder,
            process,
            x,
            passage,
            maximum,
            pi_h_nodes,
            undershoot_cdf,
            barrier_node: k_bar,
        })
    }

    pub fn barrier(&self) -> f64 {
        self.x
    }

    /// `q U(x, ∞)`, the conditioning mass.
    pub fn passage_probability(&self) -> f64 {
        self.passage
    }

    /// Joint density of `(u, v, y)` on `y < x`, not conditioned on passage.
    pub fn density(&self, u: f64, v: f64, y: f64) -> f64 {
        if !(u > 0.0 && v >= y && y >= 0.0 && y <= self.x) {
            return 0.0;
        }
        self.ladder.u().density_at(self.x - y) * self.process.jumps().density(u + v)
    }

    /// Density in `(u, v)` of the part with `y = x` (the path never rose before passage).
    pub fn atom_density(&self, u: f64, v: f64) -> f64 {
        if !(u > 0.0 && v >= self.x) {
            return 0.0;
        }
        self.ladder.u().atom0() * self.process.jumps().density(u + v)
    }

    pub fn conditional_density(&self, u: f64, v: f64, y: f64) -> f64 {
        self.density(u, v, y) / self.passage
    }

    /// Total conditional mass of the triple law; one up to discretization.
    pub fn conditional_mass(&self) -> f64 {
        self.maximum.mass() / self.passage
    }

    fn pi_h_at(&self, index: usize, w: f64) -> f64 {
        match self.pi_h_nodes.get(index) {
            Some(v) => *v,
            None => self.ladder.pi_h_tail(w),
        }
    }

    /// Unnormalized `Σ_k U_k g(x − k·h + w)` over the maximum's lattice.
    fn against_maximum<F: Fn(usize, f64) -> f64>(&self, w: f64, g: F) -> f64 {
        let h = self.ladder.step();
        let u = self.ladder.u();
        let kb = self.barrier_node;
        (0..=kb)
            .map(|k| {
                let weight = if k == kb && kb > 0 { 0.5 } else { 1.0 } * u.node_mass(k);
                weight * g(kb - k, (kb - k) as f64 * h + w)
            })
            .sum()
    }

    /// `P(u > w | τ⁺_x < ∞) = Σ U(dz) Π̄_H(x − z + w) / (q U(x, ∞))`.
    pub fn overshoot_survival(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return self.conditional_mass();
        }
        let h = self.ladder.step();
        let t = w / h;
        let m = t.floor() as usize;
        let f = t - m as f64;
        let at = |mm: usize| self.against_maximum(mm as f64 * h, |j, s| self.pi_h_at(j + mm, s));
        let lo = at(m);
        let value = if f == 0.0 {
            lo
        } else {
            lo * (1.0 - f) + at(m + 1) * f
        };
        value / self.passage
    }

    /// Conditional overshoot density `Σ U(dz) Π̄_X(x − z + w) / (q U(x, ∞))`.
    pub fn overshoot_density(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let jumps = self.process.jumps();
        self.against_maximum(w, |_, s| jumps.tail(s)) / self.passage
    }

    pub fn overshoot_cdf(&self, w: f64) -> f64 {
        self.conditional_mass() - self.overshoot_survival(w)
    }

    /// `P(y ≤ t | τ⁺_x < ∞)`.
    pub fn last_max_cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if t >= self.x {
            return self.conditional_mass();
        }
        self.maximum.tail(self.x - t) / self.passage
    }

    /// `P(y < t | τ⁺_x < ∞)`; differs from the distribution function only at
    /// `t = x`, where paths that never rose before passage put an atom.
    pub fn last_max_cdf_left(&self, t: f64) -> f64 {
        if t > self.x {
            return self.conditional_mass();
        }
        if t == self.x {
            return (self.maximum.mass() - self.maximum.atom0()) / self.passage;
        }
        self.last_max_cdf(t)
    }

    /// `P(v ≤ t | τ⁺_x < ∞)`.
    pub fn undershoot_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let h = self.ladder.step();
        let kb = self.barrier_node;
        let raw = if t <= self.x {
            let s = t / h;
            let m = (s.floor() as usize).min(kb.saturating_sub(1));
            let f = s - m as f64;
            if m + 1 > kb {
                self.undershoot_cdf[kb]
            } else {
                self.undershoot_cdf[m] * (1.0 - f) + self.undershoot_cdf[m + 1] * f
            }
        } else {
            let jumps = self.process.jumps();
            self.undershoot_cdf[kb]
                + self.ladder.u().cumulative(self.x)
                    * (jumps.integrated_tail(self.x) - jumps.integrated_tail(t))
        };
        raw / self.passage
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{build_ladder, GridSpec};
    use crate::measures::JumpMeasure;

    fn exp_model() -> SpectrallyPositiveBV {
        SpectrallyPositiveBV::new(2.0, JumpMeasure::exponential(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn passage_probability_matches_lundberg() {
        let p = exp_model();
        let l = build_ladder(&p, GridSpec::new(1.0 / 1024.0, 48.0).unwrap()).unwrap();
        assert!((pollaczek_khintchine(&l, 0.0).unwrap() - 0.5).abs() < 1e-6);
        assert!((pollaczek_khintchine(&l, 2.0).unwrap() - 0.5 * (-1.0f64).exp()).abs() < 1e-5);
        assert!(pollaczek_khintchine(&l, 40.0).unwrap() < 1e-8);
        assert!(pollaczek_khintchine(&l, 49.0).is_err());
    }

    #[test]
    fn exponential_overshoot_is_memoryless() {
        let p = exp_model();
        let l = build_ladder(&p, GridSpec::new(1.0 / 1024.0, 48.0).unwrap()).unwrap();
        let law = PassageLaw::new(&l, &p, 2.0).unwrap();
        assert!((law.conditional_mass() - 1.0).abs() < 1e-3);
        for w in [0.01, 0.3, 1.0, 2.5, 6.0] {
            assert!(
                (law.overshoot_density(w) - (-w).exp()).abs() < 1e-3,
                "w={w}"
            );
            assert!(
                (law.overshoot_survival(w) - (-w).exp()).abs() < 1e-3,
                "w={w}"
            );
        }
    }

    #[test]
    fn marginals_are_distribution_functions() {
        let p = exp_model();
        let l = build_ladder(&p, GridSpec::new(1.0 / 256.0, 30.0).unwrap()).unwrap();
        let law = PassageLaw::new(&l, &p, 2.0).unwrap();
        let mut prev = (0.0, 0.0);
        for k in 0..400 {
            let t = k as f64 * 0.025;
            let (a, b) = (law.last_max_cdf(t), law.undershoot_cdf(t));
            assert!(a + 1e-12 >= prev.0 && b + 1e-12 >= prev.1, "t={t}");
            prev = (a, b);
        }
        assert!((law.last_max_cdf(2.0) - law.conditional_mass()).abs() < 1e-12);
        assert!((law.undershoot_cdf(60.0) - law.conditional_mass()).abs() < 1e-3);
        assert_eq!(law.density(1.0, 0.5, 1.0), 0.0);
    }

    #[test]
    fn off_grid_barrier_rejected() {
        let p = exp_model();
        let l = build_ladder(&p, GridSpec::new(0.25, 8.0).unwrap()).unwrap();
        assert!(PassageLaw::new(&l, &p, 1.1).is_err());
    }
}
