//! Exact check of the quintuple law for integer-valued random walks.
//!
//! With `σ = min{n ≥ 1 : S_n > x}` and `θ̄` the index where `max_{k<σ} S_k`
//! is attained (last index, or first index for the swapped ladders),
//!
//! `P(σ−1−θ̄ = i, θ̄ = j, S_σ − x = u, x − S_{σ−1} = v, x − S_θ̄ = y)
//!   = U′(x−y, j) Û(v−y, i) F(u+v)`
//!
//! where `U′(z, j) = P(S_j ≥ S_k for k < j, S_j = z)` and
//! `Û(w, i) = P(S_m < 0 for 1 ≤ m ≤ i, S_i = −w)`. For the first-index
//! version the inequalities swap strictness. Both sides are enumerated
//! exhaustively.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Law of a single integer step.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeStep {
    support: Vec<i64>,
    probs: Vec<f64>,
}

impl LatticeStep {
    pub fn new(support: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::config(
                "step law needs matching nonempty support and probabilities",
            ));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("step probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-15 {
            return Err(Error::config(format!(
                "step probabilities sum to {total}, not 1"
            )));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::config("step support has repeated values"));
        }
        if !support.iter().zip(&probs).any(|(s, p)| *s > 0 && *p > 0.0) {
            return Err(Error::config(
                "step law needs a positive step with positive probability",
            ));
        }
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `F({k})`.
    pub fn pmf(&self, k: i64) -> f64 {
        self.support
            .iter()
            .position(|s| *s == k)
            .map_or(0.0, |i| self.probs[i])
    }

    fn steps(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.probs.iter().copied())
            .filter(|(_, p)| *p > 0.0)
    }
}

/// Which attaining index of the pre-passage maximum is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Last index; weak ascending and strict descending ladders.
    LastMax,
    /// First index; strict ascending and weak descending ladders.
    FirstMax,
}

/// `(i, j, u, v, y)`.
pub type Tuple = (usize, usize, i64, i64, i64);

pub type QuintuplePMF = BTreeMap<Tuple, f64>;

/// Enumeration limits.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub x: i64,
    pub i_max: usize,
    pub j_max: usize,
    /// Maximum number of path prefixes visited.
    pub budget: u64,
}

impl Bounds {
    pub fn new(x: i64, i_max: usize, j_max: usize) -> Result<Self> {
        if x < 0 {
            return Err(Error::config(format!("barrier must be ≥ 0, got {x}")));
        }
        Ok(Self {
            x,
            i_max,
            j_max,
            budget: 10_000_000,
        })
    }
}

struct Walker<'a> {
    step: &'a LatticeStep,
    b: Bounds,
    variant: Variant,
    visited: u64,
    out: QuintuplePMF,
}

impl Walker<'_> {
    /// `k` steps taken, current level `s`, maximum `m` attained at index `arg`.
    fn visit(&mut self, k: usize, s: i64, m: i64, arg: usize, p: f64) -> Result<()> {
        self.visited += 1;
        if self.visited > self.b.budget {
            return Err(Error::Budget {
                budget: self.b.budget,
            });
        }
        for (d, q) in self.step.steps() {
            let next = s + d;
            let prob = p * q;
            if next > self.b.x {
                let (i, j) = (k - arg, arg);
                if i <= self.b.i_max && j <= self.b.j_max {
                    let key = (i, j, next - self.b.x, self.b.x - s, self.b.x - m);
                    *self.out.entry(key).or_insert(0.0) += prob;
                }
                continue;
            }
            let new_max = match self.variant {
                Variant::LastMax => next >= m,
                Variant::FirstMax => next > m,
            };
            let (m2, arg2) = if new_max { (next, k + 1) } else { (m, arg) };
            // Tuples need j ≤ j_max and i + j + 1 ≤ i_max + j_max + 1 steps.
            if arg2 > self.b.j_max || k + 1 > self.b.i_max + self.b.j_max {
                continue;
            }
            self.visit(k + 1, next, m2, arg2, prob)?;
        }
        Ok(())
    }
}

/// Left side by exhaustive path enumeration.
pub fn enumerate_lhs(step: &LatticeStep, b: Bounds, variant: Variant) -> Result<QuintuplePMF> {
    let mut w = Walker {
        step,
        b,
        variant,
        visited: 0,
        out: BTreeMap::new(),
    };
    w.visit(0, 0, 0, 0, 1.0)?;
    Ok(w.out)
}

/// Green measures of the two ladder processes, keyed by (level, time).
#[derive(Debug, Clone, Default)]
pub struct GreenMeasures {
    /// Ascending: `(z, j) ↦ P(S_j = z, S_j is a (weak or strict) new maximum)`.
    pub ascending: BTreeMap<(i64, usize), f64>,
    /// Descending: `(w, i) ↦ P(S_i = −w, S_m below 0 (strictly or weakly) for 1 ≤ m ≤ i)`.
    pub descending: BTreeMap<(i64, usize), f64>,
}

struct GreenWalker<'a, F> {
    step: &'a LatticeStep,
    n_max: usize,
    budget: u64,
    keep: F,
    path: Vec<i64>,
    visited: u64,
    out: BTreeMap<(i64, usize), f64>,
}

impl<F: Fn(&[i64]) -> Option<i64>> GreenWalker<'_, F> {
    fn visit(&mut self, p: f64) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::Budget {
                budget: self.budget,
            });
        }
        if let Some(level) = (self.keep)(&self.path) {
            *self.out.entry((level, self.path.len() - 1)).or_insert(0.0) += p;
        }
        if self.path.len() - 1 == self.n_max {
            return Ok(());
        }
        let last = self.path[self.path.len() - 1];
        for (d, q) in self.step.steps() {
            self.path.push(last + d);
            self.visit(p * q)?;
            self.path.pop();
        }
        Ok(())
    }
}

/// Sums the probability of every path of length at most `n_max` accepted by
/// `keep`, keyed by the level `keep` returns and the path length.
fn green<F>(
    step: &LatticeStep,
    n_max: usize,
    budget: u64,
    keep: F,
) -> Result<BTreeMap<(i64, usize), f64>>
where
    F: Fn(&[i64]) -> Option<i64>,
{
    let mut w = GreenWalker {
        step,
        n_max,
        budget,
        keep,
        path: vec![0],
        visited: 0,
        out: BTreeMap::new(),
    };
    w.visit(1.0)?;
    Ok(w.out)
}

/// Green measures by direct enumeration of their defining events.
pub fn green_measures(step: &LatticeStep, b: Bounds, variant: Variant) -> Result<GreenMeasures> {
    let x = b.x;
    let weak = variant == Variant::LastMax;
    let ascending = green(step, b.j_max, b.budget, |path| {
        let last = *path.last().expect("nonempty");
        let before = &path[..path.len() - 1];
        let ok = if weak {
            before.iter().all(|s| *s <= last)
        } else {
            before.iter().all(|s| *s < last)
        };
        (ok && last <= x).then_some(last)
    })?;
    let descending = green(step, b.i_max, b.budget, |path| {
        let ok = if weak {
            path[1..].iter().all(|s| *s < 0)
        } else {
            path[1..].iter().all(|s| *s <= 0)
        };
        let last = *path.last().expect("nonempty");
        (ok && last <= 0).then_some(-last)
    })?;
    Ok(GreenMeasures {
        ascending,
        descending,
    })
}

/// One compared tuple.
#[derive(Debug, Clone, Copy)]
pub struct IdentityRow {
    pub tuple: Tuple,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub variant: Variant,
    pub rows: Vec<IdentityRow>,
    pub max_error: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "j", "u", "v", "y", "lhs", "rhs", "abs_err"])?;
        for r in &self.rows {
            let (i, j, u, v, y) = r.tuple;
            wtr.write_record([
                i.to_string(),
                j.to_string(),
                u.to_string(),
                v.to_string(),
                y.to_string(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                format!("{:e}", r.abs_err),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "{} {:?}: {} tuples, max error {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.variant,
            self.rows.len(),
            self.max_error
        )
    }
}

/// Multiplies every right-hand value by `1 + δ`; a negative control.
#[derive(Debug, Clone, Copy, Default)]
pub struct Corruption {
    pub relative: f64,
}

/// Compares both sides over the union of their supports.
pub fn verify_identity(step: &LatticeStep, b: Bounds, variant: Variant) -> Result<IdentityReport> {
    verify_identity_with(step, b, variant, Corruption::default())
}

pub fn verify_identity_with(
    step: &LatticeStep,
    b: Bounds,
    variant: Variant,
    corrupt: Corruption,
) -> Result<IdentityReport> {
    let (lhs, green) = rayon::join(
        || enumerate_lhs(step, b, variant),
        || green_measures(step, b, variant),
    );
    let (lhs, green) = (lhs?, green?);
    let mut rhs: QuintuplePMF = BTreeMap::new();
    for (&(z, j), &a) in &green.ascending {
        let y = b.x - z;
        for (&(w, i), &d) in &green.descending {
            let v = w + y;
            for (s, f) in step.steps() {
                let u = s - v;
                if u >= 1 {
                    *rhs.entry((i, j, u, v, y)).or_insert(0.0) +=
                        a * d * f * (1.0 + corrupt.relative);
                }
            }
        }
    }
    let keys: std::collections::BTreeSet<Tuple> = lhs.keys().chain(rhs.keys()).copied().collect();
    let rows: Vec<IdentityRow> = keys
        .into_par_iter()
        .map(|t| {
            let l = lhs.get(&t).copied().unwrap_or(0.0);
            let r = rhs.get(&t).copied().unwrap_or(0.0);
            IdentityRow {
                tuple: t,
                lhs: l,
                rhs: r,
                abs_err: (l - r).abs(),
            }
        })
        .collect();
    let max_error = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    Ok(IdentityReport {
        variant,
        rows,
        max_error,
        pass: max_error <= 1e-12,
    })
}

/// `P(σ = n, S_σ − x = u)` for `n ≤ n_max`, by sweeping the law of the
/// walk killed on passage.
pub fn passage_law_by_sweep(
    step: &LatticeStep,
    x: i64,
    n_max: usize,
) -> BTreeMap<(usize, i64), f64> {
    let mut alive: BTreeMap<i64, f64> = BTreeMap::from([(0, 1.0)]);
    let mut out = BTreeMap::new();
    for n in 1..=n_max {
        let mut next: BTreeMap<i64, f64> = BTreeMap::new();
        for (&s, &p) in &alive {
            for (d, q) in step.steps() {
                let t = s + d;
                if t > x {
                    *out.entry((n, t - x)).or_insert(0.0) += p * q;
                } else {
                    *next.entry(t).or_insert(0.0) += p * q;
                }
            }
        }
        alive = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn down_law() -> LatticeStep {
        LatticeStep::new(vec![-1, 1, 2], vec![0.6, 0.3, 0.1]).unwrap()
    }

    #[test]
    fn lhs_examples() {
        let b = Bounds::new(1, 4, 4).unwrap();
        let pmf = enumerate_lhs(&down_law(), b, Variant::LastMax).unwrap();
        assert!((pmf[&(0, 0, 1, 1, 1)] - 0.1).abs() < 1e-15);
        assert!((pmf[&(0, 1, 2, 0, 0)] - 0.03).abs() < 1e-15);
        assert!(pmf
            .keys()
            .all(|(_, _, u, v, y)| *u >= 1 && v >= y && *y >= 0 && *y <= 1));
    }

    #[test]
    fn green_examples() {
        let b = Bounds::new(1, 4, 4).unwrap();
        let g = green_measures(&down_law(), b, Variant::LastMax).unwrap();
        assert_eq!(g.ascending[&(0, 0)], 1.0);
        assert!((g.ascending[&(1, 1)] - 0.3).abs() < 1e-15);
        assert_eq!(g.descending[&(0, 0)], 1.0);
    }

    #[test]
    fn identity_holds_for_both_variants() {
        let b = Bounds::new(1, 4, 4).unwrap();
        for v in [Variant::LastMax, Variant::FirstMax] {
            let r = verify_identity(&down_law(), b, v).unwrap();
            assert!(r.pass, "{}", r.summary());
        }
    }

    #[test]
    fn ties_at_the_barrier_do_not_pass() {
        // Path (+1) lands on x = 1 exactly and must continue.
        let b = Bounds::new(1, 0, 1).unwrap();
        let pmf = enumerate_lhs(&down_law(), b, Variant::LastMax).unwrap();
        assert!(pmf.keys().all(|(_, _, u, _, _)| *u >= 1));
        assert!(pmf.contains_key(&(0, 1, 1, 0, 0)));
    }

    #[test]
    fn deterministic_walk() {
        let step = LatticeStep::new(vec![1], vec![1.0]).unwrap();
        let b = Bounds::new(3, 2, 5).unwrap();
        let r = verify_identity(&step, b, Variant::LastMax).unwrap();
        assert!(r.pass);
        let pmf = enumerate_lhs(&step, b, Variant::LastMax).unwrap();
        assert_eq!(pmf.len(), 1);
        assert_eq!(pmf[&(0, 3, 1, 0, 0)], 1.0);
    }

    #[test]
    fn corrupted_rhs_fails() {
        let b = Bounds::new(1, 3, 3).unwrap();
        let r = verify_identity_with(
            &down_law(),
            b,
            Variant::LastMax,
            Corruption { relative: 1e-6 },
        )
        .unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn budget_enforced() {
        let mut b = Bounds::new(2, 6, 6).unwrap();
        b.budget = 100;
        assert!(matches!(
            enumerate_lhs(&down_law(), b, Variant::LastMax),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn step_law_validation() {
        assert!(LatticeStep::new(vec![-1, 1], vec![0.5, 0.4]).is_err());
        assert!(LatticeStep::new(vec![-1, -2], vec![0.5, 0.5]).is_err());
        assert!(LatticeStep::new(vec![1, 1], vec![0.5, 0.5]).is_err());
    }
}
