#![allow(dead_code)]

//! Independent numerical oracles and Monte Carlo helpers shared by the
//! integration tests. Nothing here calls into the crate's own quadrature or
//! special functions.

use std::f64::consts::PI;

pub mod criteria;
pub mod geweke;

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let m = panels + panels % 2;
    let h = (hi - lo) / m as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function from Simpson integration of the
/// density; accurate to about 1e-13 for |x| ≤ 10.
pub fn big_phi(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 + simpson(phi, 0.0, x, 4000)
    } else {
        0.5 - simpson(phi, x, 0.0, 4000)
    }
}

/// Sample mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Variance of the mean of an autocorrelated series, by non-overlapping batch
/// means with `batches` batches.
pub fn batch_means_var_of_mean(x: &[f64], batches: usize) -> f64 {
    let b = x.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|k| x[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64)
        .collect();
    let (_, v) = mean_var(&means);
    v / batches as f64
}

/// Two-sided standard-normal critical value for level `p`, by bisection on
/// the Simpson normal distribution function.
pub fn normal_critical(p: f64) -> f64 {
    let target = 1.0 - p / 2.0;
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if big_phi(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Asserts that the sample mean of `draws` is within `k` standard errors of
/// `expected`.
pub fn assert_mean_within(draws: &[f64], expected: f64, k: f64, what: &str) {
    let (m, v) = mean_var(draws);
    let se = (v / draws.len() as f64).sqrt();
    assert!(
        (m - expected).abs() <= k * se,
        "{what}: mean {m} vs expected {expected} (se {se}, {:.2} se)",
        (m - expected).abs() / se
    );
}

/// Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    sample.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic,
/// sqrt(−ln(0.005)/2) / sqrt(n).
pub fn ks_critical_1pct(n: usize) -> f64 {
    (-(0.005f64).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Sup-distance between the empirical distribution of `sample` and a target
/// given by its unnormalized log density on `[lo, hi]`, normalized by
/// Simpson integration on a fine grid.
pub fn sup_distance_to_density<F: Fn(f64) -> f64>(sample: &mut [f64], ln_target: F, lo: f64, hi: f64) -> f64 {
    let m = 20_000;
    let h = (hi - lo) / m as f64;
    let xs: Vec<f64> = (0..=m).map(|k| lo + k as f64 * h).collect();
    let lmax = xs.iter().map(|&x| ln_target(x)).fold(f64::NEG_INFINITY, f64::max);
    let f: Vec<f64> = xs.iter().map(|&x| (ln_target(x) - lmax).exp()).collect();
    let mut cum = vec![0.0; m + 1];
    for k in 1..=m {
        cum[k] = cum[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
    }
    let total = cum[m];
    let cdf = |x: f64| -> f64 {
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let k = (((x - lo) / h) as usize).min(m - 1);
        let t = x - xs[k];
        // Trapezoid on the partial panel with linear interpolation of f.
        let fx = f[k] + (f[k + 1] - f[k]) * t / h;
        (cum[k] + 0.5 * t * (f[k] + fx)) / total
    };
    ks_statistic(sample, cdf)
}

/// Geweke comparison of marginal-conditional draws (independent) with a
/// successive-conditional chain, statistic by statistic. Returns
/// `(name, z-score)` pairs.
pub fn geweke_scores(names: &[&str], mc: &[Vec<f64>], sc: &[Vec<f64>]) -> Vec<(String, f64)> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let a: Vec<f64> = mc.iter().map(|r| r[j]).collect();
            let b: Vec<f64> = sc.iter().map(|r| r[j]).collect();
            let (ma, va) = mean_var(&a);
            let (mb, _) = mean_var(&b);
            let vb = batch_means_var_of_mean(&b, 200);
            let z = (ma - mb) / (va / a.len() as f64 + vb).sqrt();
            (name.to_string(), z)
        })
        .collect()
}
