//! Selection-bias diagnostics over curated datasets.
//!
//! Intra-class similarity is the set of pairwise cosines among a class's
//! image embeddings; lower means more diverse. Per-class comparisons between
//! two datasets use an image-level bootstrap ([`bootstrap`]) and count a
//! class as significantly lower only when its whole 95% interval sits on
//! one side of zero.

pub mod bootstrap;
mod correlation;
mod textual;

pub use bootstrap::BootstrapConfig;
pub use correlation::{average_ranks, spearman};
pub use textual::{
    binned_false_class_means, false_class_proportion, nearest_text_dataset, FalseClassBin,
};

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::EmbeddingMatrix;
use crate::curator::DatasetManifest;
use crate::error::{Error, Result};
use crate::evalmetrics::{sort_ascending, ClassStat};
use crate::rng;
use crate::stats;
use crate::vectorops::Query;

/// Pairwise image similarities for one class, stored as the strict upper
/// triangle in row-major order: (0,1), (0,2), ..., (1,2), ...
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSimilaritySet {
    pub wnid: String,
    /// Number of images.
    pub n: usize,
    pub sims: Vec<f64>,
}

impl ClassSimilaritySet {
    pub fn from_vectors(wnid: impl Into<String>, rows: &[&[f32]]) -> Result<Self> {
        let queries = rows
            .iter()
            .map(|r| Query::new(r))
            .collect::<Result<Vec<_>>>()?;
        let n = rows.len();
        let mut sims = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, qi) in queries.iter().enumerate() {
            if rows[i].len() != rows[0].len() {
                return Err(Error::DimMismatch {
                    left: rows[0].len(),
                    right: rows[i].len(),
                });
            }
            for qj in &queries[i + 1..] {
                sims.push(qi.score(qj));
            }
        }
        Ok(ClassSimilaritySet {
            wnid: wnid.into(),
            n,
            sims,
        })
    }

    /// Fewer than two images: no pairs to compare.
    pub fn is_degenerate(&self) -> bool {
        self.n < 2
    }

    pub fn mean(&self) -> f64 {
        stats::mean(&self.sims)
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(i != j && j < self.n);
        self.sims[i * self.n - i * (i + 1) / 2 + (j - i - 1)]
    }
}

/// Per-class pairwise image similarities, classes in wnid order.
pub fn intra_class_sims(
    manifest: &DatasetManifest,
    image_embeddings: &EmbeddingMatrix,
) -> Result<Vec<ClassSimilaritySet>> {
    let groups: Vec<(&str, Vec<usize>)> = manifest.by_class().into_iter().collect();
    groups
        .par_iter()
        .map(|(wnid, idx)| {
            let rows = idx
                .iter()
                .map(|&i| {
                    let id = &manifest.rows[i].instance_id;
                    image_embeddings
                        .get(id)
                        .map_err(|_| Error::MissingEmbedding(id.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            ClassSimilaritySet::from_vectors(*wnid, &rows)
        })
        .collect()
}

/// `target` draws with replacement from `sims`.
pub fn resample_match(sims: &[f64], target: usize, seed: u64) -> Result<Vec<f64>> {
    if sims.is_empty() {
        return Err(Error::Empty("similarity source"));
    }
    let mut r = rng::stream(seed, 0);
    Ok((0..target)
        .map(|_| sims[r.random_range(0..sims.len())])
        .collect())
}

/// For each class present in both, resample `a`'s similarities to the
/// number `b` has, then pool everything. Returns `(a_resampled, b_pooled)`.
pub fn resample_match_per_class(
    a: &[ClassSimilaritySet],
    b: &[ClassSimilaritySet],
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let b_by: HashMap<&str, &ClassSimilaritySet> = b.iter().map(|s| (s.wnid.as_str(), s)).collect();
    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    for sa in a {
        let Some(sb) = b_by.get(sa.wnid.as_str()) else {
            continue;
        };
        if sa.sims.is_empty() || sb.sims.is_empty() {
            continue;
        }
        let mut r = rng::keyed_stream(seed, &[b"resample", sa.wnid.as_bytes()]);
        out_a.extend((0..sb.sims.len()).map(|_| sa.sims[r.random_range(0..sa.sims.len())]));
        out_b.extend_from_slice(&sb.sims);
    }
    (out_a, out_b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDiffReport {
    /// `mean(a) - mean(b)` per shared class, ascending.
    pub stats: Vec<ClassStat>,
    /// Shared classes with fewer than two images on either side.
    pub skipped: Vec<String>,
}

fn bootstrap_interval(
    a: &ClassSimilaritySet,
    b: &ClassSimilaritySet,
    cfg: &BootstrapConfig,
) -> (f64, f64) {
    let mut ra = rng::keyed_stream(cfg.seed, &[b"intra-a", a.wnid.as_bytes()]);
    let mut rb = rng::keyed_stream(cfg.seed, &[b"intra-b", b.wnid.as_bytes()]);
    let mut w = Vec::new();
    let reps: Vec<f64> = (0..cfg.replicates)
        .map(|_| {
            bootstrap::replicate_pair_mean(a, &mut ra, &mut w)
                - bootstrap::replicate_pair_mean(b, &mut rb, &mut w)
        })
        .collect();
    stats::percentile_interval(reps, cfg.alpha)
}

/// Difference of mean intra-class similarity per shared class, with a
/// percentile interval from the image-level bootstrap.
pub fn per_class_mean_diff_ci(
    a: &[ClassSimilaritySet],
    b: &[ClassSimilaritySet],
    cfg: &BootstrapConfig,
) -> Result<MeanDiffReport> {
    if cfg.replicates == 0 {
        return Err(Error::Invalid(
            "bootstrap needs at least one replicate".into(),
        ));
    }
    let b_by: HashMap<&str, &ClassSimilaritySet> = b.iter().map(|s| (s.wnid.as_str(), s)).collect();
    let shared: Vec<(&ClassSimilaritySet, &ClassSimilaritySet)> = a
        .iter()
        .filter_map(|sa| b_by.get(sa.wnid.as_str()).map(|sb| (sa, *sb)))
        .collect();
    let skipped: Vec<String> = shared
        .iter()
        .filter(|(sa, sb)| sa.is_degenerate() || sb.is_degenerate())
        .map(|(sa, _)| sa.wnid.clone())
        .collect();
    let mut stats: Vec<ClassStat> = shared
        .par_iter()
        .filter(|(sa, sb)| !sa.is_degenerate() && !sb.is_degenerate())
        .map(|(sa, sb)| {
            let value = sa.mean() - sb.mean();
            let (lo, hi) = bootstrap_interval(sa, sb, cfg);
            ClassStat {
                wnid: sa.wnid.clone(),
                value,
                ci_low: lo.min(value),
                ci_high: hi.max(value),
                n: sa.n.min(sb.n),
                wide: false,
            }
        })
        .collect();
    sort_ascending(&mut stats);
    Ok(MeanDiffReport { stats, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetComparison {
    /// Fraction of compared classes where `a` is significantly lower.
    pub prop_a_lower: f64,
    pub prop_b_lower: f64,
    pub n_shared: usize,
}

/// Summarizes per-class difference intervals: a class counts for `a` when
/// the interval lies strictly below zero, for `b` when strictly above.
pub fn summarize_diffs(diffs: &[ClassStat]) -> DatasetComparison {
    let n = diffs.len();
    if n == 0 {
        return DatasetComparison {
            prop_a_lower: 0.0,
            prop_b_lower: 0.0,
            n_shared: 0,
        };
    }
    let a_lower = diffs.iter().filter(|s| s.ci_high < 0.0).count();
    let b_lower = diffs.iter().filter(|s| s.ci_low > 0.0).count();
    DatasetComparison {
        prop_a_lower: a_lower as f64 / n as f64,
        prop_b_lower: b_lower as f64 / n as f64,
        n_shared: n,
    }
}

pub fn compare_datasets(
    a: &[ClassSimilaritySet],
    b: &[ClassSimilaritySet],
    cfg: &BootstrapConfig,
) -> Result<(DatasetComparison, MeanDiffReport)> {
    let report = per_class_mean_diff_ci(a, b, cfg)?;
    Ok((summarize_diffs(&report.stats), report))
}

/// Mean cosine between each image and its class's synset-text embedding,
/// with a bootstrap percentile interval over images. Classes in wnid order.
pub fn cross_modal_class_stats(
    manifest: &DatasetManifest,
    image_embeddings: &EmbeddingMatrix,
    synset_text_embeddings: &EmbeddingMatrix,
    cfg: &BootstrapConfig,
) -> Result<Vec<ClassStat>> {
    if image_embeddings.dim() != synset_text_embeddings.dim() {
        return Err(Error::DimMismatch {
            left: image_embeddings.dim(),
            right: synset_text_embeddings.dim(),
        });
    }
    let groups: Vec<(&str, Vec<usize>)> = manifest.by_class().into_iter().collect();
    groups
        .par_iter()
        .map(|(wnid, idx)| {
            let si = synset_text_embeddings
                .position(wnid)
                .ok_or_else(|| Error::MissingEmbedding(wnid.to_string()))?;
            let sims = idx
                .iter()
                .map(|&i| {
                    let id = &manifest.rows[i].instance_id;
                    let row = image_embeddings
                        .get(id)
                        .map_err(|_| Error::MissingEmbedding(id.clone()))?;
                    Ok(Query::new(row)?.score_row(synset_text_embeddings, si))
                })
                .collect::<Result<Vec<f64>>>()?;
            let value = stats::mean(&sims);
            let mut r = rng::keyed_stream(cfg.seed, &[b"cross-modal", wnid.as_bytes()]);
            let reps: Vec<f64> = (0..cfg.replicates)
                .map(|_| bootstrap::replicate_mean(&sims, &mut r))
                .collect();
            let (lo, hi) = if reps.is_empty() {
                (value, value)
            } else {
                stats::percentile_interval(reps, cfg.alpha)
            };
            Ok(ClassStat {
                wnid: wnid.to_string(),
                value,
                ci_low: lo.min(value),
                ci_high: hi.max(value),
                n: sims.len(),
                wide: false,
            })
        })
        .collect()
}
