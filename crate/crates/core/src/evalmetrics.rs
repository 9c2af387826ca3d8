//! Recall-based evaluation of ranked predictions against a manifest.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingMatrix;
use crate::curator::DatasetManifest;
use crate::error::{Error, Result};
use crate::jsonl;
use crate::stats::{self, Z95};
use crate::vectorops;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(rename = "id")]
    pub instance_id: String,
    /// Class ids, most confident first.
    pub ranked: Vec<String>,
}

impl PredictionRecord {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.ranked.len());
        if let Some(dup) = self.ranked.iter().find(|w| !seen.insert(w.as_str())) {
            return Err(Error::Invalid(format!(
                "prediction for {} ranks {dup} twice",
                self.instance_id
            )));
        }
        Ok(())
    }

    pub fn hit_at(&self, wnid: &str, k: usize) -> bool {
        self.ranked.iter().take(k).any(|w| w == wnid)
    }
}

pub fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    jsonl::for_each_line(path, |line, p: PredictionRecord| {
        p.validate().map_err(|e| Error::Parse {
            path: path.into(),
            line,
            message: e.to_string(),
        })?;
        if !seen.insert(p.instance_id.clone()) {
            return Err(Error::DuplicateId {
                path: path.into(),
                line,
                id: p.instance_id,
            });
        }
        out.push(p);
        Ok(())
    })?;
    Ok(out)
}

/// Per-class statistic with a 95% interval. `n` is the class support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    pub wnid: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    /// Set when the interval is the uninformative fallback.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub wide: bool,
}

pub fn write_stats_csv<W: Write>(mut w: W, stats: &[ClassStat]) -> std::io::Result<()> {
    writeln!(w, "wnid,value,ci_low,ci_high,n")?;
    for s in stats {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.wnid, s.value, s.ci_low, s.ci_high, s.n
        )?;
    }
    w.flush()
}

/// Recall@k per class, with Wilson intervals. Classes in wnid order.
pub fn per_class_recall(
    manifest: &DatasetManifest,
    predictions: &[PredictionRecord],
    k: usize,
) -> Result<Vec<ClassStat>> {
    if k == 0 {
        return Err(Error::Invalid("recall@k requires k >= 1".into()));
    }
    let by_id: HashMap<&str, &PredictionRecord> = predictions
        .iter()
        .map(|p| (p.instance_id.as_str(), p))
        .collect();
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for row in &manifest.rows {
        let p = by_id
            .get(row.instance_id.as_str())
            .ok_or_else(|| Error::MissingPrediction(row.instance_id.clone()))?;
        let t = tally.entry(&row.wnid).or_default();
        t.1 += 1;
        if p.hit_at(&row.wnid, k) {
            t.0 += 1;
        }
    }
    Ok(tally
        .into_iter()
        .map(|(wnid, (hits, n))| {
            let (ci_low, ci_high) = stats::wilson_interval(hits, n, Z95);
            ClassStat {
                wnid: wnid.to_string(),
                value: hits as f64 / n as f64,
                ci_low,
                ci_high,
                n,
                wide: false,
            }
        })
        .collect())
}

/// Mean of per-class recalls.
pub fn equally_weighted_accuracy(stats: &[ClassStat]) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::Empty("class stats"));
    }
    Ok(stats.iter().map(|s| s.value).sum::<f64>() / stats.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedAccuracy {
    pub value: f64,
    /// Total weight of the evaluated classes before renormalization.
    pub covered_mass: f64,
}

/// `Σ w_c · recall_c` with weights restricted to the evaluated classes and
/// renormalized to sum to one.
pub fn weighted_accuracy(
    stats: &[ClassStat],
    weights: &BTreeMap<String, f64>,
) -> Result<WeightedAccuracy> {
    if stats.is_empty() {
        return Err(Error::Empty("class stats"));
    }
    let mut ws = Vec::with_capacity(stats.len());
    for s in stats {
        let w = *weights
            .get(&s.wnid)
            .ok_or_else(|| Error::MissingWeight(s.wnid.clone()))?;
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Invalid(format!(
                "weight {w} for {} is not a non-negative number",
                s.wnid
            )));
        }
        ws.push(w);
    }
    let mass: f64 = ws.iter().sum();
    if mass <= 0.0 {
        return Err(Error::Invalid(
            "weights of evaluated classes sum to zero".into(),
        ));
    }
    let value = stats.iter().zip(&ws).map(|(s, w)| w / mass * s.value).sum();
    Ok(WeightedAccuracy {
        value,
        covered_mass: mass,
    })
}

/// Top-`k` synsets by cosine to each image embedding, in image row order.
pub fn zero_shot_predict(
    image_embeddings: &EmbeddingMatrix,
    synset_text_embeddings: &EmbeddingMatrix,
    k: usize,
) -> Result<Vec<PredictionRecord>> {
    let ranked = vectorops::argmax_batch(image_embeddings, synset_text_embeddings, k)?;
    Ok(image_embeddings
        .ids()
        .iter()
        .zip(ranked)
        .map(|(id, r)| PredictionRecord {
            instance_id: id.clone(),
            ranked: r.into_iter().map(|n| n.id).collect(),
        })
        .collect())
}

/// Recall differences `a - b` over shared classes, sorted ascending.
///
/// The interval is a normal approximation for the difference of two
/// independent proportions, with each variance taken at the Wilson-adjusted
/// proportion. Classes with fewer than two items on either side get the
/// uninformative interval [-1, 1] and `wide = true`.
pub fn per_class_recall_diff_ci(a: &[ClassStat], b: &[ClassStat]) -> Result<Vec<ClassStat>> {
    let b_by: HashMap<&str, &ClassStat> = b.iter().map(|s| (s.wnid.as_str(), s)).collect();
    let mut out: Vec<ClassStat> = a
        .iter()
        .filter_map(|sa| b_by.get(sa.wnid.as_str()).map(|sb| (sa, *sb)))
        .map(|(sa, sb)| {
            let value = sa.value - sb.value;
            let n = sa.n.min(sb.n);
            if sa.n < 2 || sb.n < 2 {
                return ClassStat {
                    wnid: sa.wnid.clone(),
                    value,
                    ci_low: -1.0,
                    ci_high: 1.0,
                    n,
                    wide: true,
                };
            }
            let hits = |s: &ClassStat| (s.value * s.n as f64).round() as usize;
            let var = stats::wilson_adjusted_variance(hits(sa), sa.n, Z95)
                + stats::wilson_adjusted_variance(hits(sb), sb.n, Z95);
            let half = Z95 * var.sqrt();
            ClassStat {
                wnid: sa.wnid.clone(),
                value,
                ci_low: (value - half).max(-1.0),
                ci_high: (value + half).min(1.0),
                n,
                wide: false,
            }
        })
        .collect();
    if out.is_empty() {
        return Err(Error::Empty("shared classes"));
    }
    sort_ascending(&mut out);
    Ok(out)
}

/// Ascending by value, ties by wnid.
pub fn sort_ascending(stats: &mut [ClassStat]) {
    stats.sort_by(|x, y| {
        x.value
            .total_cmp(&y.value)
            .then_with(|| x.wnid.cmp(&y.wnid))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curator::ManifestRow;

    fn manifest(rows: &[(&str, &str)]) -> DatasetManifest {
        DatasetManifest::from_rows(
            rows.iter()
                .map(|(id, w)| ManifestRow {
                    instance_id: id.to_string(),
                    wnid: w.to_string(),
                    score: 1.0,
                })
                .collect(),
            0.0,
        )
        .unwrap()
    }

    fn pred(id: &str, ranked: &[&str]) -> PredictionRecord {
        PredictionRecord {
            instance_id: id.into(),
            ranked: ranked.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn stat(wnid: &str, value: f64, n: usize) -> ClassStat {
        ClassStat {
            wnid: wnid.into(),
            value,
            ci_low: value,
            ci_high: value,
            n,
            wide: false,
        }
    }

    #[test]
    fn recall_counts() {
        let m = manifest(&[("1", "a"), ("2", "a"), ("3", "a"), ("4", "a")]);
        let p = [
            pred("1", &["a", "b"]),
            pred("2", &["b", "a"]),
            pred("3", &["a"]),
            pred("4", &["c", "b"]),
        ];
        let r1 = per_class_recall(&m, &p, 1).unwrap();
        assert_eq!(r1[0].value, 0.5);
        assert!(r1[0].ci_low < 0.5 && r1[0].ci_high > 0.5);
        assert_eq!(per_class_recall(&m, &p, 5).unwrap()[0].value, 0.75);
        assert!(
            matches!(per_class_recall(&m, &p[..3], 1), Err(Error::MissingPrediction(id)) if id == "4")
        );
    }

    #[test]
    fn all_correct_has_unit_recall() {
        let m = manifest(&[("1", "a"), ("2", "b")]);
        let p = [pred("1", &["a"]), pred("2", &["b"])];
        for s in per_class_recall(&m, &p, 1).unwrap() {
            assert_eq!(s.value, 1.0);
            assert_eq!(s.ci_high, 1.0);
            assert!(s.ci_low <= 1.0);
        }
    }

    #[test]
    fn accuracies() {
        assert_eq!(
            equally_weighted_accuracy(&[stat("a", 1.0, 1), stat("b", 0.0, 1)]).unwrap(),
            0.5
        );
        assert_eq!(
            equally_weighted_accuracy(&[stat("a", 0.7, 1)]).unwrap(),
            0.7
        );
        assert!(equally_weighted_accuracy(&[]).is_err());

        let stats = [stat("a", 0.8, 4), stat("b", 0.4, 4)];
        let w: BTreeMap<String, f64> = [("a".into(), 0.75), ("b".into(), 0.25)].into();
        assert!((weighted_accuracy(&stats, &w).unwrap().value - 0.7).abs() < 1e-15);
        let one: BTreeMap<String, f64> = [("a".into(), 0.0), ("b".into(), 1.0)].into();
        assert_eq!(weighted_accuracy(&stats, &one).unwrap().value, 0.4);
        let partial: BTreeMap<String, f64> = [("a".into(), 1.0)].into();
        assert!(
            matches!(weighted_accuracy(&stats, &partial), Err(Error::MissingWeight(w)) if w == "b")
        );
    }

    #[test]
    fn weights_renormalize_over_evaluated_classes() {
        let stats = [stat("a", 1.0, 4), stat("b", 0.0, 4)];
        let w: BTreeMap<String, f64> =
            [("a".into(), 0.2), ("b".into(), 0.2), ("c".into(), 0.6)].into();
        let r = weighted_accuracy(&stats, &w).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert!((r.covered_mass - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_shot_examples() {
        let syn = EmbeddingMatrix::from_rows([
            ("n1", vec![1.0f32, 0.0, 0.0]),
            ("n2", vec![0.0, 1.0, 0.0]),
            ("n3", vec![0.0, 0.0, 1.0]),
        ])
        .unwrap();
        let imgs =
            EmbeddingMatrix::from_rows([("x", vec![0.0f32, 1.0, 0.0]), ("y", vec![0.1, 0.2, 0.9])])
                .unwrap();
        let p = zero_shot_predict(&imgs, &syn, 3).unwrap();
        assert_eq!(p[0].ranked[0], "n2");
        assert_eq!(p[1].ranked, ["n3", "n2", "n1"]);
        let bad = EmbeddingMatrix::from_rows([("z", vec![1.0f32])]).unwrap();
        assert!(matches!(
            zero_shot_predict(&bad, &syn, 1),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn diff_examples() {
        let a = [stat("a", 0.5, 40), stat("b", 0.9, 40)];
        let same = per_class_recall_diff_ci(&a, &a).unwrap();
        assert!(same
            .iter()
            .all(|s| s.value == 0.0 && s.ci_low < 0.0 && s.ci_high > 0.0));

        let d = per_class_recall_diff_ci(&[stat("a", 1.0, 50)], &[stat("a", 0.0, 50)]).unwrap();
        assert_eq!(d[0].value, 1.0);
        assert!(d[0].ci_low > 0.0);

        let d = per_class_recall_diff_ci(&[stat("a", 1.0, 1)], &[stat("a", 0.0, 9)]).unwrap();
        assert!(d[0].wide && d[0].ci_low == -1.0 && d[0].ci_high == 1.0);

        assert!(per_class_recall_diff_ci(&[stat("a", 1.0, 3)], &[stat("b", 1.0, 3)]).is_err());

        let d = per_class_recall_diff_ci(
            &[stat("a", 0.2, 10), stat("b", 0.9, 10)],
            &[stat("a", 0.8, 10), stat("b", 0.1, 10)],
        )
        .unwrap();
        assert_eq!(d[0].wnid, "a");
        assert!(d[0].value < d[1].value);
    }

    #[test]
    fn duplicate_ranked_entries_rejected() {
        assert!(pred("x", &["a", "a"]).validate().is_err());
    }
}
