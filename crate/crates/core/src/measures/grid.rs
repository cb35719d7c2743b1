//! Measures on the lattice `{0, h, 2h, …}` with a separate atom at the origin.
//!
//! A [`GridMeasure`] stores an atom at `0` plus absolutely continuous mass
//! projected onto nodes `k·h` with tent functions of half-width `h`. Node `k`
//! stands for the cell `[(k−½)h, (k+½)h]`, node `0` for `[0, h/2]`.
//! Convolution is exact lattice convolution, so total mass and exponential
//! moments multiply exactly.

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone)]
pub struct GridMeasure {
    step: f64,
    atom0: f64,
    /// Node mass divided by `step` (the lattice density).
    values: Vec<f64>,
    sums: Arc<OnceLock<(Vec<f64>, Vec<f64>)>>,
}

impl PartialEq for GridMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.step == other.step && self.atom0 == other.atom0 && self.values == other.values
    }
}

/// Below this size direct convolution beats the FFT.
const DIRECT_LIMIT: usize = 1 << 14;

impl GridMeasure {
    pub fn new(step: f64, atom0: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::config(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if values.is_empty() {
            return Err(Error::config("grid needs at least one node"));
        }
        if !(atom0 >= 0.0 && atom0.is_finite())
            || values.iter().any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::domain("grid masses must be finite and nonnegative"));
        }
        Ok(Self::raw(step, atom0, values))
    }

    fn raw(step: f64, atom0: f64, values: Vec<f64>) -> Self {
        Self {
            step,
            atom0,
            values,
            sums: Arc::new(OnceLock::new()),
        }
    }

    /// Builds the measure from lattice node masses; `masses[0]` excludes the atom.
    pub fn from_node_masses(step: f64, atom0: f64, masses: &[f64]) -> Result<Self> {
        Self::new(step, atom0, masses.iter().map(|m| m / step).collect())
    }

    pub fn zero(step: f64, nodes: usize) -> Result<Self> {
        Self::new(step, 0.0, vec![0.0; nodes])
    }

    pub fn dirac(step: f64, nodes: usize, mass: f64) -> Result<Self> {
        Self::new(step, mass, vec![0.0; nodes])
    }

    /// Number of nodes for a grid covering `[0, length]`.
    pub fn node_count(step: f64, length: f64) -> Result<usize> {
        if !(step > 0.0 && length > 0.0 && length.is_finite()) {
            return Err(Error::config(format!(
                "grid needs positive step and length, got step={step}, length={length}"
            )));
        }
        let n = (length / step).round();
        if n > 1e8 {
            return Err(Error::config(format!("grid with {n} nodes is too large")));
        }
        Ok(n as usize + 1)
    }

    /// Projects a density on `[0, ∞)` onto the tent basis of a grid over `[0, length]`.
    pub fn from_density<F: Fn(f64) -> f64>(step: f64, length: f64, f: F) -> Result<Self> {
        let n = Self::node_count(step, length)?;
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let x = k as f64 * step;
            let right = quad::gauss_legendre8(|s| f(s) * (1.0 - (s - x) / step), x, x + step);
            let left = if k == 0 {
                0.0
            } else {
                quad::gauss_legendre8(|s| f(s) * (1.0 - (x - s) / step), x - step, x)
            };
            values.push((left + right) / step);
        }
        Self::new(step, 0.0, values)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn atom0(&self) -> f64 {
        self.atom0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Right end of the grid, `(len − 1)·h`.
    pub fn length(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// Lattice mass at node `k`, the origin atom included.
    pub fn node_mass(&self, k: usize) -> f64 {
        let m = self.values[k] * self.step;
        if k == 0 {
            m + self.atom0
        } else {
            m
        }
    }

    pub fn node_masses(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node_mass(k)).collect()
    }

    fn sums(&self) -> &(Vec<f64>, Vec<f64>) {
        self.sums.get_or_init(|| {
            let n = self.len();
            let mut prefix = vec![0.0; n];
            let mut suffix = vec![0.0; n + 1];
            let mut acc = 0.0;
            for (k, p) in prefix.iter_mut().enumerate() {
                acc += self.node_mass(k);
                *p = acc;
            }
            for k in (0..n).rev() {
                suffix[k] = suffix[k + 1] + self.node_mass(k);
            }
            (prefix, suffix)
        })
    }

    pub fn mass(&self) -> f64 {
        self.sums().1[0]
    }

    /// `∫ e^{s x} M(dx)` over the lattice.
    pub fn exp_moment(&self, s: f64) -> Result<f64> {
        let v: f64 = (0..self.len())
            .map(|k| self.node_mass(k) * (s * self.node(k)).exp())
            .sum();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { s })
        }
    }

    /// The measure `e^{θx} M(dx)`.
    pub fn tilt(&self, theta: f64) -> Result<Self> {
        let values: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * (theta * self.node(k)).exp())
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { s: theta });
        }
        Ok(Self::raw(self.step, self.atom0, values))
    }

    /// First `nodes` nodes of the grid.
    pub fn truncated(&self, nodes: usize) -> Self {
        let nodes = nodes.clamp(1, self.len());
        Self::raw(self.step, self.atom0, self.values[..nodes].to_vec())
    }

    /// Same measure multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::raw(
            self.step,
            self.atom0 * c,
            self.values.iter().map(|v| v * c).collect(),
        )
    }

    /// Locates `z` as (node, fraction through the node's cell).
    fn locate(&self, z: f64) -> (usize, f64) {
        let t = z / self.step;
        if t < 0.5 {
            return (0, (2.0 * t).clamp(0.0, 1.0));
        }
        let k = (t + 0.5).floor();
        (k as usize, (t - (k - 0.5)).clamp(0.0, 1.0))
    }

    /// `M[0, z]`, piecewise linear between cell boundaries; `M[0, 0]` is the atom.
    pub fn cumulative(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        let (k, frac) = self.locate(z);
        let (prefix, suffix) = self.sums();
        if k >= self.len() {
            return suffix[0];
        }
        if k == 0 {
            self.atom0 + frac * self.values[0] * self.step
        } else {
            prefix[k - 1] + frac * self.node_mass(k)
        }
    }

    /// `M(z, ∞)`, summed from the right for accuracy in the far tail.
    pub fn tail(&self, z: f64) -> f64 {
        let (_, suffix) = self.sums();
        if z < 0.0 {
            return suffix[0];
        }
        let (k, frac) = self.locate(z);
        if k >= self.len() {
            return 0.0;
        }
        let here = if k == 0 {
            self.values[0] * self.step
        } else {
            self.node_mass(k)
        };
        suffix[k + 1] + (1.0 - frac) * here
    }

    /// Linear interpolation of the lattice density; zero beyond the grid.
    pub fn density_at(&self, z: f64) -> f64 {
        if z < 0.0 || z > self.length() {
            return 0.0;
        }
        let t = z / self.step;
        let k = (t.floor() as usize).min(self.len() - 1);
        if k + 1 >= self.len() {
            return self.values[k];
        }
        let f = t - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }

    fn same_step(&self, other: &Self) -> Result<()> {
        if (self.step - other.step).abs() <= 1e-12 * self.step {
            Ok(())
        } else {
            Err(Error::config(format!(
                "grid steps differ: {} vs {}",
                self.step, other.step
            )))
        }
    }
}

/// Lattice convolution of two grid measures on a common step, full length.
pub fn convolve(a: &GridMeasure, b: &GridMeasure) -> Result<GridMeasure> {
    a.same_step(b)?;
    let out_len = a.len() + b.len() - 1;
    let c = lattice_convolve(&a.node_masses(), &b.node_masses(), out_len);
    let atom = a.atom0 * b.atom0;
    split_atom(a.step, atom, c)
}

fn split_atom(step: f64, atom: f64, mut masses: Vec<f64>) -> Result<GridMeasure> {
    masses[0] = (masses[0] - atom).max(0.0);
    for m in masses.iter_mut() {
        if *m < 0.0 {
            *m = 0.0;
        }
    }
    GridMeasure::from_node_masses(step, atom, &masses)
}

fn lattice_convolve(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    if a.len().min(b.len()) < 64 || a.len().saturating_mul(b.len()) < DIRECT_LIMIT * 16 {
        let mut out = vec![0.0; out_len];
        for (i, x) in a.iter().enumerate() {
            if *x == 0.0 || i >= out_len {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(out_len - i) {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa = padded(a, size);
    let mut fb = padded(b, size);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa.iter().take(out_len).map(|z| z.re * scale).collect()
}

fn padded(a: &[f64], size: usize) -> Vec<Complex<f64>> {
    let mut v: Vec<Complex<f64>> = a.iter().map(|x| Complex::new(*x, 0.0)).collect();
    v.resize(size, Complex::new(0.0, 0.0));
    v
}

/// `scale · Σ_{n≥0} K^{*n}` restricted to the grid of `kernel`.
///
/// `ratio` bounds the mass of `K` on the grid and must be below one; since
/// the grid restriction of `T * K` has mass at most `ratio` times that of
/// `T`, it bounds the ratio of consecutive truncated terms. Terms are added until the remaining sum
/// is below `1e-12` of the accumulated mass. Returns the sum and the number
/// of convolution powers used.
pub fn renewal_series(
    kernel: &GridMeasure,
    scale: f64,
    ratio: f64,
) -> Result<(GridMeasure, usize)> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::domain(format!(
            "renewal kernel mass {ratio} is not below one"
        )));
    }
    let n = kernel.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fk = padded(&kernel.node_masses(), size);
    fwd.process(&mut fk);
    let inv_size = 1.0 / size as f64;

    let mut term = vec![0.0; n];
    term[0] = 1.0;
    let mut term_atom = 1.0;
    let mut acc = term.clone();
    let mut acc_atom = 1.0;
    let mut acc_mass = 1.0;
    let mut powers = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); size];
    loop {
        let term_mass: f64 = term.iter().sum();
        if term_mass * ratio / (1.0 - ratio) <= 1e-12 * acc_mass {
            break;
        }
        if powers >= 1_000_000 {
            return Err(Error::Budget { budget: 1_000_000 });
        }
        for (slot, t) in buf
            .iter_mut()
            .zip(term.iter().chain(std::iter::repeat(&0.0)))
        {
            *slot = Complex::new(*t, 0.0);
        }
        fwd.process(&mut buf);
        for (x, y) in buf.iter_mut().zip(&fk) {
            *x *= y;
        }
        inv.process(&mut buf);
        for (t, z) in term.iter_mut().zip(&buf) {
            *t = (z.re * inv_size).max(0.0);
        }
        term_atom *= kernel.atom0;
        powers += 1;
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
        acc_atom += term_atom;
        acc_mass = acc.iter().sum();
    }
    let masses: Vec<f64> = acc.iter().map(|m| m * scale).collect();
    Ok((split_atom(kernel.step, acc_atom * scale, masses)?, powers))
}
