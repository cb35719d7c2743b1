//! Jump laws given as a piecewise-linear density table.

use std::io::Read;

use crate::error::{Error, Result};
use crate::quad;

/// Normalized law with a density linear between consecutive knots and zero
/// outside `[knots[0], knots[n-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLaw {
    knots: Vec<f64>,
    density: Vec<f64>,
    /// Mass of `[knots[i], ∞)`.
    right_mass: Vec<f64>,
    mean: f64,
}

impl TabulatedLaw {
    /// Returns the normalized law and the raw integral of the input table.
    pub fn new(knots: Vec<f64>, density: Vec<f64>) -> Result<(Self, f64)> {
        if knots.len() != density.len() || knots.len() < 2 {
            return Err(Error::config(
                "jump table needs at least two (y, density) rows",
            ));
        }
        if knots[0] < 0.0 || knots.iter().any(|y| !y.is_finite()) {
            return Err(Error::config("jump table knots must be finite and ≥ 0"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "jump table knots must be strictly increasing",
            ));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::config("jump table densities must be finite and ≥ 0"));
        }
        let n = knots.len();
        let mut right = vec![0.0; n];
        for i in (0..n - 1).rev() {
            right[i] =
                right[i + 1] + 0.5 * (density[i] + density[i + 1]) * (knots[i + 1] - knots[i]);
        }
        let raw = right[0];
        if raw <= 0.0 {
            return Err(Error::config("jump table has zero total mass"));
        }
        let density: Vec<f64> = density.iter().map(|d| d / raw).collect();
        let right_mass: Vec<f64> = right.iter().map(|m| m / raw).collect();
        let mut mean = 0.0;
        for i in 0..n - 1 {
            // ∫ y·(linear density) over the cell, exact for a quadratic.
            let (a, b) = (knots[i], knots[i + 1]);
            let (fa, fb) = (density[i], density[i + 1]);
            mean += (b - a) / 6.0 * (a * fa + 4.0 * 0.5 * (a + b) * 0.5 * (fa + fb) + b * fb);
        }
        Ok((
            Self {
                knots,
                density,
                right_mass,
                mean,
            },
            raw,
        ))
    }

    /// Reads `y,density` rows; a header line is skipped if not numeric.
    pub fn read_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let (mut ys, mut ds) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::config(format!(
                    "jump table row {} has fewer than two columns",
                    line + 1
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(y), Ok(d)) => {
                    ys.push(y);
                    ds.push(d);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::config(format!(
                        "jump table row {} is not numeric",
                        line + 1
                    )))
                }
            }
        }
        Ok((ys, ds))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn cell(&self, y: f64) -> Option<usize> {
        let n = self.knots.len();
        if y < self.knots[0] || y >= self.knots[n - 1] {
            return None;
        }
        Some(self.knots.partition_point(|k| *k <= y) - 1)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.density[i + 1] - self.density[i]) / (self.knots[i + 1] - self.knots[i])
    }

    pub fn density(&self, y: f64) -> f64 {
        match self.cell(y) {
            Some(i) => self.density[i] + self.slope(i) * (y - self.knots[i]),
            None => 0.0,
        }
    }

    pub fn tail(&self, y: f64) -> f64 {
        if y < self.knots[0] {
            return 1.0;
        }
        match self.cell(y) {
            Some(i) => {
                let b = self.knots[i + 1];
                let (dy, db) = (self.density(y), self.density[i + 1]);
                self.right_mass[i + 1] + 0.5 * (dy + db) * (b - y)
            }
            None => 0.0,
        }
    }

    /// `∫_y^∞ F̄(z) dz`.
    pub fn integrated_tail(&self, y: f64) -> f64 {
        let n = self.knots.len();
        let end = self.knots[n - 1];
        if y >= end {
            return 0.0;
        }
        let mut total = 0.0;
        let start = if y < self.knots[0] {
            total += self.knots[0] - y;
            0
        } else {
            self.cell(y).unwrap_or(n - 2)
        };
        for i in start..n - 1 {
            let a = self.knots[i].max(y);
            let b = self.knots[i + 1];
            total += quad::gauss_legendre8(|z| self.tail(z), a, b);
        }
        total
    }

    /// `∫₀^∞ e^{θy} F̄(y) dy`.
    pub fn tail_transform(&self, theta: f64) -> f64 {
        let y0 = self.knots[0];
        let mut total = if theta == 0.0 {
            y0
        } else {
            (theta * y0).exp_m1() / theta
        };
        for w in self.knots.windows(2) {
            total += quad::gauss_legendre8(|z| (theta * z).exp() * self.tail(z), w[0], w[1]);
        }
        total
    }

    /// `∫ e^{θy} F(dy)`.
    pub fn mgf(&self, theta: f64) -> f64 {
        (0..self.knots.len() - 1)
            .map(|i| self.cell_tilted_mass(theta, i))
            .sum()
    }

    /// `∫ e^{θy} f(y) dy` over cell `i`.
    pub(crate) fn cell_tilted_mass(&self, theta: f64, i: usize) -> f64 {
        let a = self.knots[i];
        let (d, s) = (self.density[i], self.slope(i));
        quad::gauss_legendre8(
            |z| (theta * z).exp() * (d + s * (z - a)),
            a,
            self.knots[i + 1],
        )
    }

    /// Draws from the cell `i` linear density by inversion.
    pub(crate) fn invert_in_cell(&self, i: usize, target: f64) -> f64 {
        let a = self.knots[i];
        let w = self.knots[i + 1] - a;
        let d = self.density[i];
        let s = self.slope(i);
        let disc = (d * d + 2.0 * s * target).max(0.0);
        let denom = d + disc.sqrt();
        let t = if denom > 0.0 {
            2.0 * target / denom
        } else {
            0.0
        };
        a + t.clamp(0.0, w)
    }

    pub(crate) fn cell_mass(&self, i: usize) -> f64 {
        self.right_mass[i] - self.right_mass[i + 1]
    }
}
