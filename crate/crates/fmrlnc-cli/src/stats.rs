//! Small statistics helpers for the Monte Carlo reports.

use std::collections::BTreeMap;

/// Binomial standard error evaluated at probability `p`.
pub fn binomial_stderr(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Median with the usual midpoint convention for even counts.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN stopping times"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Nearest-rank percentile, `frac` in (0, 1].
pub fn percentile(values: &[f64], frac: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN stopping times"));
    let rank = ((frac * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Total variation distance between two distributions over the same discrete
/// support (missing keys count as zero mass).
pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<K> = a.keys().cloned().collect();
    for k in b.keys() {
        if !a.contains_key(k) {
            keys.push(k.clone());
        }
    }
    let mass = |m: &BTreeMap<K, f64>, k: &K| m.get(k).copied().unwrap_or(0.0);
    keys.iter().map(|k| (mass(a, k) - mass(b, k)).abs()).sum::<f64>() / 2.0
}

/// Bootstrap standard error of a Bernoulli mean, used to sanity-check the
/// analytic stderr column.
pub fn bootstrap_stderr<R: rand::Rng + ?Sized>(
    outcomes: &[bool],
    resamples: usize,
    rng: &mut R,
) -> f64 {
    let n = outcomes.len();
    assert!(n > 0);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut hits = 0u64;
        for _ in 0..n {
            if outcomes[rng.gen_range(0..n)] {
                hits += 1;
            }
        }
        means.push(hits as f64 / n as f64);
    }
    let avg = means.iter().sum::<f64>() / resamples as f64;
    let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    var.sqrt()
}
