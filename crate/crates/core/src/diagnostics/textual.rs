//! Text-side diagnostics: how well a caption singles out its intended
//! synset, and nearest-caption dataset construction.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::EmbeddingMatrix;
use crate::curator::{bin_of, DatasetManifest, DropLedger, ManifestRow};
use crate::error::{Error, Result};
use crate::vectorops::{self, Query};

/// Fraction of the other synsets that score strictly higher against the
/// caption than the intended one. Exact ties do not count.
pub fn false_class_proportion(
    caption: &[f32],
    intended: &str,
    synsets: &EmbeddingMatrix,
) -> Result<f64> {
    Ok(false_class_detail(caption, intended, synsets)?.1)
}

/// `(sim to intended, false-class proportion)`.
fn false_class_detail(
    caption: &[f32],
    intended: &str,
    synsets: &EmbeddingMatrix,
) -> Result<(f64, f64)> {
    if synsets.count() < 2 {
        return Err(Error::Invalid(
            "false-class proportion needs at least two synsets".into(),
        ));
    }
    let target = synsets
        .position(intended)
        .ok_or_else(|| Error::UnknownId(intended.to_string()))?;
    let q = Query::new(caption)?;
    if caption.len() != synsets.dim() {
        return Err(Error::DimMismatch {
            left: caption.len(),
            right: synsets.dim(),
        });
    }
    let own = q.score_row(synsets, target);
    let above = (0..synsets.count())
        .filter(|&i| i != target && q.score_row(synsets, i) > own)
        .count();
    Ok((own, above as f64 / (synsets.count() - 1) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalseClassBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
    /// `None` for an empty bin.
    pub mean: Option<f64>,
}

/// Bins captions by similarity to their intended synset and averages the
/// false-class proportion in each half-open bin.
pub fn binned_false_class_means(
    texts: &[(&[f32], &str)],
    synsets: &EmbeddingMatrix,
    bin_edges: &[f64],
) -> Result<Vec<FalseClassBin>> {
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Invalid(
            "bin edges must be strictly increasing, at least two".into(),
        ));
    }
    let details = texts
        .par_iter()
        .map(|(v, w)| false_class_detail(v, w, synsets))
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![(0usize, 0.0f64); bin_edges.len() - 1];
    for (sim, prop) in details {
        if let Some(b) = bin_of(bin_edges, sim) {
            sums[b].0 += 1;
            sums[b].1 += prop;
        }
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(b, (count, total))| FalseClassBin {
            low: bin_edges[b],
            high: bin_edges[b + 1],
            count,
            mean: (count > 0).then(|| total / count as f64),
        })
        .collect())
}

/// For each labelled query caption, the corpus caption most similar to it,
/// kept when the similarity reaches `min_sim` and labelled with the
/// query's class.
///
/// Several queries landing on the same corpus row collapse to the
/// highest-scoring one (ties to the smaller wnid); those collapses are
/// counted under `multi_label` in the ledger. Rows follow corpus order.
pub fn nearest_text_dataset(
    queries: &[(&[f32], &str)],
    corpus: &EmbeddingMatrix,
    min_sim: f64,
) -> Result<DatasetManifest> {
    if !(-1.0..=1.0).contains(&min_sim) {
        return Err(Error::Invalid(format!("min_sim {min_sim} outside [-1, 1]")));
    }
    if corpus.is_empty() {
        return Err(Error::Empty("nearest-text corpus"));
    }
    let hits = queries
        .par_iter()
        .map(|(v, w)| vectorops::nearest_neighbor(v, corpus).map(|n| (n, *w)))
        .collect::<Result<Vec<_>>>()?;

    let mut ledger = DropLedger {
        input: queries.len(),
        ..Default::default()
    };
    let mut best: BTreeMap<usize, (f64, &str)> = BTreeMap::new();
    for (n, wnid) in &hits {
        if n.score < min_sim {
            ledger.below_threshold += 1;
            continue;
        }
        let row = corpus.position(&n.id).expect("id from corpus");
        match best.get_mut(&row) {
            None => {
                best.insert(row, (n.score, wnid));
            }
            Some(cur) => {
                ledger.multi_label += 1;
                if n.score > cur.0 || (n.score == cur.0 && *wnid < cur.1) {
                    *cur = (n.score, wnid);
                }
            }
        }
    }
    let rows: Vec<ManifestRow> = best
        .into_iter()
        .map(|(row, (score, wnid))| ManifestRow {
            instance_id: corpus.id(row).to_string(),
            wnid: wnid.to_string(),
            score,
        })
        .collect();
    ledger.output = rows.len();
    let mut m = DatasetManifest::from_rows(rows, min_sim)?;
    m.drop_ledger = ledger;
    m.config_digest = crate::curator::config_digest(&("nearest-text", min_sim));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syn5() -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows((0..5).map(|i| {
            let mut v = vec![0.0f32; 5];
            v[i] = 1.0;
            (format!("n{i}"), v)
        }))
        .unwrap()
    }

    #[test]
    fn proportion_examples() {
        let s = syn5();
        assert_eq!(
            false_class_proportion(&[0.0, 0.0, 1.0, 0.0, 0.0], "n2", &s).unwrap(),
            0.0
        );
        // intended n2 ranked third of five
        let t = [0.5, 0.4, 0.3, 0.2, 0.1];
        assert_eq!(false_class_proportion(&t, "n2", &s).unwrap(), 0.5);
        assert_eq!(false_class_proportion(&t, "n4", &s).unwrap(), 1.0);
        // ties do not count
        assert_eq!(
            false_class_proportion(&[1.0, 1.0, 0.0, 0.0, 0.0], "n0", &s).unwrap(),
            0.0
        );
        assert!(matches!(
            false_class_proportion(&t, "n9", &s),
            Err(Error::UnknownId(_))
        ));
    }

    #[test]
    fn binned_means() {
        let s = syn5();
        let exact: Vec<Vec<f32>> = (0..5)
            .map(|i| {
                let mut v = vec![0.0f32; 5];
                v[i] = 2.0;
                v
            })
            .collect();
        // low similarity to n4, which then ranks last
        let low = [1.0f32, 0.9, 0.8, 0.7, 0.1];
        let wn: Vec<String> = (0..5).map(|i| format!("n{i}")).collect();
        let mut texts: Vec<(&[f32], &str)> = exact
            .iter()
            .zip(&wn)
            .map(|(v, w)| (v.as_slice(), w.as_str()))
            .collect();
        texts.push((&low, "n4"));
        let bins = binned_false_class_means(&texts, &s, &[-1.0, 0.5, 1.5]).unwrap();
        assert_eq!(bins[0].count, 1);
        assert_eq!(bins[0].mean, Some(1.0));
        assert_eq!(bins[1].count, 5);
        assert_eq!(bins[1].mean, Some(0.0));
        let bins = binned_false_class_means(&texts, &s, &[-1.0, -0.5, 0.5, 1.5]).unwrap();
        assert_eq!(bins[0].mean, None);
    }

    #[test]
    fn nearest_text_examples() {
        let corpus = EmbeddingMatrix::from_rows([
            ("c0", vec![1.0f32, 0.0, 0.0]),
            ("c1", vec![0.0, 1.0, 0.0]),
        ])
        .unwrap();
        let q_exact = [0.0f32, 3.0, 0.0];
        let q_orth = [0.0f32, 0.0, 1.0];
        let m = nearest_text_dataset(&[(&q_exact, "n5"), (&q_orth, "n6")], &corpus, 0.7).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(
            (
                m.rows[0].instance_id.as_str(),
                m.rows[0].wnid.as_str(),
                m.rows[0].score
            ),
            ("c1", "n5", 1.0)
        );
        assert_eq!(m.drop_ledger.below_threshold, 1);

        // two queries on the same row collapse to the better one
        let q_near = [0.1f32, 1.0, 0.0];
        let m = nearest_text_dataset(&[(&q_near, "n1"), (&q_exact, "n2")], &corpus, 0.0).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].wnid, "n2");
        assert_eq!(m.drop_ledger.multi_label, 1);

        let empty = EmbeddingMatrix::new(3, vec![], vec![]).unwrap();
        assert!(matches!(
            nearest_text_dataset(&[(&q_exact, "n1")], &empty, 0.5),
            Err(Error::Empty(_))
        ));
    }
}
