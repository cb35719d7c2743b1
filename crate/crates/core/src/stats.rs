//! Goodness-of-fit tools for weighted Monte Carlo samples.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Weighted sample sorted by value.
#[derive(Debug, Clone)]
pub struct EmpiricalDist {
    values: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
    n_effective: f64,
}

impl EmpiricalDist {
    pub fn new(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.len() != weights.len() || values.is_empty() {
            return Err(Error::config(
                "sample needs matching nonempty values and weights",
            ));
        }
        // Zero weights are allowed: importance weights can underflow.
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || values.iter().any(|v| v.is_nan())
        {
            return Err(Error::domain(
                "sample weights must be finite and nonnegative, values not NaN",
            ));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::domain("sample weights sum to zero"));
        }
        let mut pairs: Vec<(f64, f64)> = values
            .iter()
            .copied()
            .zip(weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let total: f64 = weights.iter().sum();
        let sq: f64 = weights.iter().map(|w| w * w).sum();
        Ok(Self {
            values,
            weights,
            total,
            n_effective: total * total / sq,
        })
    }

    pub fn unweighted(values: &[f64]) -> Result<Self> {
        Self::new(values, &vec![1.0; values.len()])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(Σw)² / Σw²`.
    pub fn n_effective(&self) -> f64 {
        self.n_effective
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Weighted ECDF `Σ_{x_i ≤ t} w_i / Σ w_i`.
    pub fn ecdf(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|v| *v <= t);
        self.weights[..k].iter().sum::<f64>() / self.total
    }

    /// Distinct values with the ECDF just before and at each.
    fn steps(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            let before = acc / self.total;
            while i < self.values.len() && self.values[i] == v {
                acc += self.weights[i];
                i += 1;
            }
            out.push((v, before, acc / self.total));
        }
        out
    }
}

/// Kolmogorov–Smirnov statistic with asymptotic critical values.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub n_effective: f64,
    pub critical_05: f64,
    pub critical_01: f64,
}

impl KsResult {
    /// Critical value at level 0.05 or 0.01.
    pub fn critical(&self, level: f64) -> f64 {
        if level <= 0.01 {
            self.critical_01
        } else {
            self.critical_05
        }
    }

    pub fn passes(&self, level: f64) -> bool {
        self.statistic <= self.critical(level)
    }

    /// Asymptotic p-value `P(K > √n D)`.
    pub fn p_value(&self) -> f64 {
        kolmogorov_survival(self.n_effective.sqrt() * self.statistic)
    }
}

/// `P(K > t) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²t²}` for the Kolmogorov law.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 0.3 {
        // Dual series, which converges fast for small t.
        let s: f64 = (1..=50)
            .map(|k| {
                let a = (2 * k - 1) as f64 * std::f64::consts::PI / (8.0 * t * t).sqrt();
                (-(a * a)).exp()
            })
            .sum();
        return 1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * s;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// `t` with `P(K > t) = level`.
pub fn kolmogorov_quantile(level: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sup distance between the weighted ECDF and a continuous `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(e: &EmpiricalDist, cdf: F) -> Result<KsResult> {
    ks_distance_with_left(e, &cdf, &cdf)
}

/// Sup distance for a law with atoms: `left(t)` is the limit `F(t−)`.
pub fn ks_distance_with_left<F, G>(e: &EmpiricalDist, cdf: F, left: G) -> Result<KsResult>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = e.n_effective();
    if n < 10.0 {
        return Err(Error::InsufficientSamples {
            n_effective: n,
            required: 10.0,
        });
    }
    let mut d: f64 = 0.0;
    for (v, before, at) in e.steps() {
        d = d.max((at - cdf(v)).abs()).max((before - left(v)).abs());
    }
    let root = n.sqrt();
    Ok(KsResult {
        statistic: d,
        n_effective: n,
        critical_05: kolmogorov_quantile(0.05) / root,
        critical_01: kolmogorov_quantile(0.01) / root,
    })
}

/// Wilson score interval for `successes` out of `trials` (either may be weighted).
pub fn wilson_interval(successes: f64, trials: f64, z: f64) -> Result<(f64, f64)> {
    if !(trials > 0.0) || successes < 0.0 || successes > trials {
        return Err(Error::domain(format!(
            "Wilson interval needs 0 ≤ successes ≤ trials, trials > 0; got {successes}/{trials}"
        )));
    }
    let p = successes / trials;
    let z2 = z * z;
    let denom = 1.0 + z2 / trials;
    let centre = (p + z2 / (2.0 * trials)) / denom;
    let half = z / denom * (p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)).sqrt();
    let lo = if successes == 0.0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    Ok((lo, hi))
}

/// `mean ± z·se`.
pub fn normal_interval(mean: f64, se: f64, z: f64) -> (f64, f64) {
    (mean - z * se, mean + z * se)
}

#[derive(Debug, Clone)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins remaining after merging sparse ones.
    pub bins: usize,
    /// Number of merges performed.
    pub merged: usize,
}

/// Binned chi-square test against `cdf`, whose total mass is `mass`.
///
/// `edges` split the line into `edges.len() + 1` bins. Bin probabilities
/// are normalized by `mass`, counts scaled to the effective sample size,
/// and adjacent bins merged until every expected count is at least 5.
pub fn binned_chi_square<F: Fn(f64) -> f64>(
    e: &EmpiricalDist,
    cdf: F,
    edges: &[f64],
    mass: f64,
) -> Result<ChiSquareResult> {
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("bin edges must increase"));
    }
    if !(mass > 0.0) {
        return Err(Error::domain("law mass must be positive"));
    }
    let n = e.n_effective();
    let mut probs = Vec::with_capacity(edges.len() + 1);
    let mut observed = Vec::with_capacity(edges.len() + 1);
    let mut prev_cdf = 0.0;
    let mut prev_ecdf = 0.0;
    for &t in edges {
        let c = cdf(t) / mass;
        let ec = e.ecdf(t);
        probs.push(c - prev_cdf);
        observed.push(ec - prev_ecdf);
        prev_cdf = c;
        prev_ecdf = ec;
    }
    probs.push(1.0 - prev_cdf);
    observed.push(1.0 - prev_ecdf);

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (p, o) in probs.iter().zip(&observed) {
        pending = (pending.0 + p, pending.1 + o);
        if pending.0 * n >= 5.0 {
            bins.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending != (0.0, 0.0) {
        match bins.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => bins.push(pending),
        }
    }
    let merged = probs.len() - bins.len();
    if bins.len() < 2 {
        return Err(Error::InsufficientSamples {
            n_effective: n,
            required: 10.0,
        });
    }
    let statistic: f64 = bins
        .iter()
        .map(|(p, o)| {
            let exp = p * n;
            let obs = o * n;
            (obs - exp) * (obs - exp) / exp
        })
        .sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::domain(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
        bins: bins.len(),
        merged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_needs_left_limit() {
        let values: Vec<f64> = (0..40)
            .map(|k| if k < 20 { 1.0 } else { 0.05 * (k - 20) as f64 })
            .collect();
        let e = EmpiricalDist::unweighted(&values).unwrap();
        // Half the mass uniform on [0, 1), half an atom at 1.
        let cdf = |t: f64| {
            if t >= 1.0 {
                1.0
            } else {
                0.5 * t.clamp(0.0, 1.0)
            }
        };
        let left = |t: f64| 0.5 * t.clamp(0.0, 1.0);
        let with = ks_distance_with_left(&e, cdf, left).unwrap().statistic;
        let without = ks_distance(&e, cdf).unwrap().statistic;
        assert!(with < 0.03, "{with}");
        assert!(without > 0.45);
    }

    #[test]
    fn kolmogorov_critical_values() {
        assert!((kolmogorov_quantile(0.05) - 1.3581).abs() < 1e-4);
        assert!((kolmogorov_quantile(0.01) - 1.6276).abs() < 1e-4);
        // Both series agree where they meet.
        let a = kolmogorov_survival(0.3 - 1e-12);
        let b = kolmogorov_survival(0.3 + 1e-12);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(500_000.0, 1_000_000.0, 3.0).unwrap();
        assert!(lo < 0.5 && hi > 0.5);
        assert!(((hi - lo) / 2.0 - 0.0015).abs() < 1e-5);
        assert_eq!(wilson_interval(0.0, 10.0, 3.0).unwrap().0, 0.0);
        assert_eq!(wilson_interval(10.0, 10.0, 3.0).unwrap().1, 1.0);
    }

    #[test]
    fn ecdf_against_itself_and_degenerate() {
        let vals: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let e = EmpiricalDist::unweighted(&vals).unwrap();
        let r = ks_distance(&e, |t| e.ecdf(t)).unwrap();
        assert!(r.statistic <= 1.0 / 100.0 + 1e-15);
        let c = EmpiricalDist::unweighted(&[0.5; 50]).unwrap();
        let r = ks_distance(&c, |t| t.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic >= 0.5 && !r.passes(0.05));
    }

    #[test]
    fn unit_weights_match_unweighted() {
        let vals = [3.0, 1.0, 2.0, 2.0];
        let a = EmpiricalDist::unweighted(&vals).unwrap();
        let b = EmpiricalDist::new(&vals, &[1.0; 4]).unwrap();
        for t in [0.0, 1.0, 1.5, 2.0, 3.0] {
            assert_eq!(a.ecdf(t), b.ecdf(t));
        }
        assert_eq!(a.n_effective(), 4.0);
    }

    #[test]
    fn too_few_effective_samples() {
        let e = EmpiricalDist::new(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            ks_distance(&e, |t| t),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn perfect_fit_has_zero_chi_square() {
        let vals: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let e = EmpiricalDist::unweighted(&vals).unwrap();
        let edges: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let r = binned_chi_square(&e, |t| t.clamp(0.0, 1.0), &edges, 1.0).unwrap();
        assert!(r.statistic < 1e-20, "{r:?}");
        assert_eq!(r.dof, 9);
        // Half the mass: normalized comparison is still exact.
        let r = binned_chi_square(&e, |t| 0.5 * t.clamp(0.0, 1.0), &edges, 0.5).unwrap();
        assert!(r.statistic < 1e-20);
    }

    #[test]
    fn sparse_bins_are_merged() {
        let vals: Vec<f64> = (0..40).map(|i| (i as f64 + 0.5) / 40.0).collect();
        let e = EmpiricalDist::unweighted(&vals).unwrap();
        let edges: Vec<f64> = (1..40).map(|k| k as f64 / 40.0).collect();
        let r = binned_chi_square(&e, |t| t.clamp(0.0, 1.0), &edges, 1.0).unwrap();
        assert!(r.merged > 0 && r.bins < 40);
    }
}
