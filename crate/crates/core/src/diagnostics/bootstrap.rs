//! Image-level bootstrap for means of pairwise similarities.
//!
//! Pairwise similarities within a class share images, so they are not
//! independent draws. Replicates therefore resample *images* with
//! replacement and recompute the mean over pairs of distinct original
//! images. A resample of `n` images with multiplicities `w` gives
//!
//! ```text
//! mean = Σ_{i<j} w_i w_j S_ij / Σ_{i<j} w_i w_j
//! ```
//!
//! Replicates that draw a single distinct image have no pairs and are
//! redrawn.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ClassSimilaritySet;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Two-sided miss rate; 0.05 gives 95% intervals.
    pub alpha: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 1000,
            seed: 0,
            alpha: 0.05,
        }
    }
}

fn draw_weights(n: usize, rng: &mut Rng, w: &mut [u32]) {
    w.fill(0);
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
}

/// One bootstrap replicate of the mean pairwise similarity of `set`.
/// `set.n` must be at least 2.
pub fn replicate_pair_mean(set: &ClassSimilaritySet, rng: &mut Rng, w: &mut Vec<u32>) -> f64 {
    let n = set.n;
    debug_assert!(n >= 2);
    w.resize(n, 0);
    loop {
        draw_weights(n, rng, w);
        let mut num = 0.0;
        let mut den = 0.0;
        let mut k = 0;
        for i in 0..n {
            let wi = w[i] as f64;
            if wi == 0.0 {
                k += n - i - 1;
                continue;
            }
            for j in (i + 1)..n {
                let wj = w[j];
                if wj != 0 {
                    let ww = wi * wj as f64;
                    num += ww * set.sims[k];
                    den += ww;
                }
                k += 1;
            }
        }
        if den > 0.0 {
            return num / den;
        }
    }
}

/// One bootstrap replicate of the mean of independent scalars.
pub fn replicate_mean(values: &[f64], rng: &mut Rng) -> f64 {
    let n = values.len();
    (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64
}
