//! Small statistical helpers shared by the metric and diagnostic modules.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Upper quantile of the standard normal: `P(Z > z) = p`.
pub fn normal_upper_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - p)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = hits as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = p + z2 / (2.0 * n_f);
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = ((centre - half) / denom).clamp(0.0, 1.0);
    let hi = ((centre + half) / denom).clamp(0.0, 1.0);
    // guard the endpoints against rounding past the point estimate
    (lo.min(p), hi.max(p))
}

/// Variance of the Wilson-adjusted proportion `(x + z²/2) / (n + z²)`.
pub fn wilson_adjusted_variance(hits: usize, n: usize, z: f64) -> f64 {
    let z2 = z * z;
    let n_adj = n as f64 + z2;
    let p = (hits as f64 + z2 / 2.0) / n_adj;
    p * (1.0 - p) / n_adj
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Central percentile interval of `samples` at level `1 - alpha`.
pub fn percentile_interval(mut samples: Vec<f64>, alpha: f64) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    (
        quantile_sorted(&samples, alpha / 2.0),
        quantile_sorted(&samples, 1.0 - alpha / 2.0),
    )
}

/// Histogram counts over half-open bins `[edges[i], edges[i+1])`.
pub fn histogram(values: &[f64], edges: &[f64]) -> Vec<usize> {
    let mut counts = vec![0; edges.len().saturating_sub(1)];
    for &v in values {
        if let Some(b) = crate::curator::bin_of(edges, v) {
            counts[b] += 1;
        }
    }
    counts
}
