use levy_overshoot::stats::{binned_chi_square, ks_distance, wilson_interval, EmpiricalDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REPS: usize = 100;

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() / rate
}

#[test]
fn ks_rejection_rate_is_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut rejected = [0usize; 2];
    for _ in 0..REPS {
        let xs: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
        let ks = ks_distance(&EmpiricalDist::unweighted(&xs).unwrap(), |t| {
            t.clamp(0.0, 1.0)
        })
        .unwrap();
        rejected[0] += usize::from(!ks.passes(0.05));
        rejected[1] += usize::from(!ks.passes(0.01));
    }
    // Binomial(100, 0.05) exceeds 12 with probability below 0.2%.
    assert!(rejected[0] <= 12, "{rejected:?}");
    assert!(rejected[1] <= 5, "{rejected:?}");
}

#[test]
fn ks_detects_a_shifted_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let xs: Vec<f64> = (0..2000).map(|_| exp_sample(&mut rng, 1.2)).collect();
    let ks = ks_distance(&EmpiricalDist::unweighted(&xs).unwrap(), |t| {
        if t <= 0.0 {
            0.0
        } else {
            1.0 - (-t).exp()
        }
    })
    .unwrap();
    assert!(!ks.passes(0.01), "{ks:?}");
}

#[test]
fn weighted_ks_is_calibrated_under_reweighting() {
    // Draw Exp(1.5), weight by the likelihood ratio to Exp(1).
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut rejected = 0;
    for _ in 0..REPS {
        let xs: Vec<f64> = (0..1000).map(|_| exp_sample(&mut rng, 1.5)).collect();
        let ws: Vec<f64> = xs.iter().map(|x| (0.5 * x).exp() / 1.5).collect();
        let e = EmpiricalDist::new(&xs, &ws).unwrap();
        let ks = ks_distance(&e, |t| if t <= 0.0 { 0.0 } else { 1.0 - (-t).exp() }).unwrap();
        rejected += usize::from(!ks.passes(0.05));
    }
    assert!(rejected <= 15, "{rejected}");
}

#[test]
fn wilson_interval_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let p = 0.18;
    let mut covered = 0;
    for _ in 0..REPS {
        let hits = (0..500).filter(|_| rng.random::<f64>() < p).count();
        let (lo, hi) = wilson_interval(hits as f64, 500.0, 3.0).unwrap();
        covered += usize::from(lo <= p && p <= hi);
    }
    assert!(covered >= 97, "{covered}");
}

#[test]
fn chi_square_is_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let edges: Vec<f64> = (0..=10).map(|k| 0.3 * k as f64).collect();
    let cdf = |t: f64| if t <= 0.0 { 0.0 } else { 1.0 - (-t).exp() };
    let mut rejected = 0;
    for _ in 0..REPS {
        let xs: Vec<f64> = (0..1000).map(|_| exp_sample(&mut rng, 1.0)).collect();
        let e = EmpiricalDist::unweighted(&xs).unwrap();
        let r = binned_chi_square(&e, cdf, &edges, 1.0).unwrap();
        rejected += usize::from(r.p_value < 0.05);
    }
    assert!(rejected <= 12, "{rejected}");
}
