//! From lemma matches to a curated, single-label dataset.
//!
//! Pipeline: score each (caption, synset) candidate by the cosine between
//! the caption embedding and the synset-text embedding, then keep
//! candidates above a threshold and apply exclusion stages in a fixed
//! order: threshold, multi-label, nsfw, text-in-image. Every dropped row is
//! attributed to exactly one stage in a [`DropLedger`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::matcher::LemmaMatch;
use crate::rng;
use crate::vectorops::Query;

/// A (caption, synset) pair with its text-to-synset-text similarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    #[serde(rename = "id")]
    pub instance_id: String,
    pub wnid: String,
    pub score: f64,
}

/// One row of a curated dataset. Same wire shape as a candidate.
pub type ManifestRow = ScoredCandidate;

/// Scores every distinct (instance, wnid) pair in `matches`, in order of
/// first appearance.
pub fn score_candidates(
    matches: &[LemmaMatch],
    caption_embeddings: &EmbeddingMatrix,
    synset_text_embeddings: &EmbeddingMatrix,
) -> Result<Vec<ScoredCandidate>> {
    if caption_embeddings.dim() != synset_text_embeddings.dim() {
        return Err(Error::DimMismatch {
            left: caption_embeddings.dim(),
            right: synset_text_embeddings.dim(),
        });
    }
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for m in matches {
        if seen.insert((m.instance_id.as_str(), m.wnid.as_str())) {
            let ci = caption_embeddings
                .position(&m.instance_id)
                .ok_or_else(|| Error::MissingEmbedding(m.instance_id.clone()))?;
            let si = synset_text_embeddings
                .position(&m.wnid)
                .ok_or_else(|| Error::MissingEmbedding(m.wnid.clone()))?;
            pairs.push((m, ci, si));
        }
    }
    Ok(pairs
        .par_iter()
        .map(|&(m, ci, si)| {
            let q = Query::new(caption_embeddings.row(ci)).expect("validated row");
            ScoredCandidate {
                instance_id: m.instance_id.clone(),
                wnid: m.wnid.clone(),
                score: q.score_row(synset_text_embeddings, si),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub n_classes: usize,
    pub n_instances: usize,
}

/// Coverage of the raw candidate set (no exclusions) at each threshold:
/// how many candidate rows and how many distinct classes score `>= t`.
pub fn threshold_sweep(
    candidates: &[ScoredCandidate],
    thresholds: &[f64],
) -> Result<Vec<SweepPoint>> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) || thresholds.iter().any(|t| t.is_nan()) {
        return Err(Error::Invalid(
            "sweep thresholds must be strictly increasing".into(),
        ));
    }
    let mut scores: Vec<f64> = candidates.iter().map(|c| c.score).collect();
    scores.sort_by(f64::total_cmp);
    let mut best: HashMap<&str, f64> = HashMap::new();
    for c in candidates {
        let e = best.entry(&c.wnid).or_insert(f64::NEG_INFINITY);
        *e = e.max(c.score);
    }
    let mut class_best: Vec<f64> = best.into_values().collect();
    class_best.sort_by(f64::total_cmp);

    let at_least = |sorted: &[f64], t: f64| sorted.len() - sorted.partition_point(|&s| s < t);
    Ok(thresholds
        .iter()
        .map(|&t| SweepPoint {
            threshold: t,
            n_classes: at_least(&class_best, t),
            n_instances: at_least(&scores, t),
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(mut w: W, points: &[SweepPoint]) -> std::io::Result<()> {
    writeln!(w, "threshold,n_classes,n_instances")?;
    for p in points {
        writeln!(w, "{},{},{}", p.threshold, p.n_classes, p.n_instances)?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AssembleOptions {
    pub drop_multi_label: bool,
    pub drop_nsfw: bool,
    pub drop_text_in_image: bool,
}

impl AssembleOptions {
    pub fn all() -> Self {
        AssembleOptions {
            drop_multi_label: true,
            drop_nsfw: true,
            drop_text_in_image: true,
        }
    }
}

/// Row counts removed by each stage. `input - output` equals the sum of the
/// stage counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DropLedger {
    pub input: usize,
    pub below_threshold: usize,
    /// Rows of multi-label instances: every row when they are dropped, all
    /// but the best-scoring row otherwise.
    pub multi_label: usize,
    pub nsfw: usize,
    pub text_in_image: usize,
    pub top_k: usize,
    pub output: usize,
}

impl DropLedger {
    pub fn dropped(&self) -> usize {
        self.below_threshold + self.multi_label + self.nsfw + self.text_in_image + self.top_k
    }
}

/// Sidecar metadata written next to a manifest's JSONL rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSidecar {
    pub threshold: f64,
    pub counts: BTreeMap<String, usize>,
    pub drop_ledger: DropLedger,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub rows: Vec<ManifestRow>,
    pub class_counts: BTreeMap<String, usize>,
    pub threshold: f64,
    pub drop_ledger: DropLedger,
    pub config_digest: String,
}

impl DatasetManifest {
    /// Builds a manifest from rows, checking the single-label and threshold
    /// invariants.
    pub fn from_rows(rows: Vec<ManifestRow>, threshold: f64) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for r in &rows {
            if !seen.insert(r.instance_id.as_str()) {
                return Err(Error::Invalid(format!(
                    "instance {} appears twice in manifest",
                    r.instance_id
                )));
            }
            if !(r.score >= threshold) {
                return Err(Error::Invalid(format!(
                    "row {} scores {} below threshold {threshold}",
                    r.instance_id, r.score
                )));
            }
        }
        let class_counts = count_classes(&rows);
        let n = rows.len();
        Ok(DatasetManifest {
            rows,
            class_counts,
            threshold,
            drop_ledger: DropLedger {
                input: n,
                output: n,
                ..Default::default()
            },
            config_digest: String::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row indices grouped by class, classes in wnid order, rows in
    /// manifest order.
    pub fn by_class(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            out.entry(r.wnid.as_str()).or_default().push(i);
        }
        out
    }

    pub fn sidecar(&self) -> ManifestSidecar {
        ManifestSidecar {
            threshold: self.threshold,
            counts: self.class_counts.clone(),
            drop_ledger: self.drop_ledger,
            config_digest: self.config_digest.clone(),
        }
    }

    /// Writes rows to `rows_path` as JSONL and the sidecar as pretty JSON.
    pub fn save(&self, rows_path: &Path, sidecar_path: &Path) -> Result<()> {
        jsonl::write_file(rows_path, &self.rows)?;
        let mut json = serde_json::to_vec_pretty(&self.sidecar()).expect("sidecar serializes");
        json.push(b'\n');
        std::fs::write(sidecar_path, json).map_err(|e| Error::io(sidecar_path, e))
    }

    /// Loads rows, and the sidecar when given. Without a sidecar the
    /// threshold is the minimum row score.
    pub fn load(rows_path: &Path, sidecar_path: Option<&Path>) -> Result<Self> {
        let rows: Vec<ManifestRow> = jsonl::read_all(rows_path)?;
        let sidecar: Option<ManifestSidecar> = match sidecar_path {
            Some(p) => {
                let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
                Some(serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
                    path: p.into(),
                    line: e.line(),
                    message: e.to_string(),
                })?)
            }
            None => None,
        };
        let threshold = sidecar.as_ref().map(|s| s.threshold).unwrap_or_else(|| {
            rows.iter()
                .map(|r| r.score)
                .fold(f64::INFINITY, f64::min)
                .max(-1.0 - crate::vectorops::SCORE_EPS)
        });
        let mut m = DatasetManifest::from_rows(rows, threshold)?;
        if let Some(s) = sidecar {
            if s.counts != m.class_counts {
                return Err(Error::Invalid(
                    "sidecar counts disagree with manifest rows".into(),
                ));
            }
            m.drop_ledger = s.drop_ledger;
            m.config_digest = s.config_digest;
        }
        Ok(m)
    }
}

fn count_classes(rows: &[ManifestRow]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in rows {
        *counts.entry(r.wnid.clone()).or_insert(0) += 1;
    }
    counts
}

/// Hex SHA-256 of the canonical JSON of `config`.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Serialize)]
struct AssembleConfig {
    threshold: f64,
    options: AssembleOptions,
}

/// Applies threshold and exclusion stages to `candidates`.
///
/// When `drop_multi_label` is off, an instance surviving the threshold for
/// several classes keeps only its best-scoring row (ties go to the smaller
/// wnid), so the manifest stays single-label either way.
pub fn assemble(
    candidates: &[ScoredCandidate],
    threshold: f64,
    corpus: &Corpus,
    options: AssembleOptions,
) -> Result<DatasetManifest> {
    if !threshold.is_finite() {
        return Err(Error::Invalid(format!(
            "threshold {threshold} is not finite"
        )));
    }
    let mut pairs = HashSet::with_capacity(candidates.len());
    for c in candidates {
        if corpus.get(&c.instance_id).is_none() {
            return Err(Error::MissingInstance(c.instance_id.clone()));
        }
        if !pairs.insert((c.instance_id.as_str(), c.wnid.as_str())) {
            return Err(Error::Invalid(format!(
                "duplicate candidate ({}, {})",
                c.instance_id, c.wnid
            )));
        }
    }

    let mut ledger = DropLedger {
        input: candidates.len(),
        ..Default::default()
    };

    let passing: Vec<&ScoredCandidate> =
        candidates.iter().filter(|c| c.score >= threshold).collect();
    ledger.below_threshold = candidates.len() - passing.len();

    let mut per_instance: HashMap<&str, Vec<&ScoredCandidate>> = HashMap::new();
    for &c in &passing {
        per_instance.entry(&c.instance_id).or_default().push(c);
    }
    let keep = |c: &ScoredCandidate| -> bool {
        let group = &per_instance[c.instance_id.as_str()];
        if group.len() < 2 {
            return true;
        }
        if options.drop_multi_label {
            return false;
        }
        let best = group
            .iter()
            .min_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.wnid.cmp(&b.wnid))
            })
            .expect("non-empty group");
        std::ptr::eq(*best, c)
    };
    let single: Vec<&ScoredCandidate> = passing.iter().copied().filter(|c| keep(c)).collect();
    ledger.multi_label = passing.len() - single.len();

    let record = |c: &ScoredCandidate| corpus.get(&c.instance_id).expect("checked above");
    let safe: Vec<&ScoredCandidate> = single
        .into_iter()
        .filter(|c| !(options.drop_nsfw && record(c).nsfw))
        .collect();
    ledger.nsfw = passing.len() - ledger.multi_label - safe.len();

    let rows: Vec<ManifestRow> = safe
        .iter()
        .filter(|c| !(options.drop_text_in_image && record(c).text_in_image == Some(true)))
        .map(|&c| c.clone())
        .collect();
    ledger.text_in_image = safe.len() - rows.len();
    ledger.output = rows.len();

    Ok(DatasetManifest {
        class_counts: count_classes(&rows),
        rows,
        threshold,
        drop_ledger: ledger,
        config_digest: config_digest(&AssembleConfig { threshold, options }),
    })
}

/// Keeps the `k` best-scoring rows of each class (ties by id ascending),
/// preserving manifest order.
pub fn top_k_per_class(manifest: &DatasetManifest, k: usize) -> Result<DatasetManifest> {
    if k == 0 {
        return Err(Error::Invalid("top-k requires k >= 1".into()));
    }
    let mut keep = vec![false; manifest.rows.len()];
    for (_, mut idx) in manifest.by_class() {
        idx.sort_by(|&a, &b| {
            let (ra, rb) = (&manifest.rows[a], &manifest.rows[b]);
            rb.score
                .total_cmp(&ra.score)
                .then_with(|| ra.instance_id.cmp(&rb.instance_id))
        });
        for &i in idx.iter().take(k) {
            keep[i] = true;
        }
    }
    let rows: Vec<ManifestRow> = manifest
        .rows
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.clone())
        .collect();
    let mut ledger = manifest.drop_ledger;
    ledger.top_k += manifest.rows.len() - rows.len();
    ledger.output = rows.len();

    #[derive(Serialize)]
    struct TopK<'a> {
        parent: &'a str,
        top_k: usize,
    }
    Ok(DatasetManifest {
        class_counts: count_classes(&rows),
        rows,
        threshold: manifest.threshold,
        drop_ledger: ledger,
        config_digest: config_digest(&TopK {
            parent: &manifest.config_digest,
            top_k: k,
        }),
    })
}

/// Class count divided by total rows.
pub fn relative_frequencies(manifest: &DatasetManifest) -> Result<BTreeMap<String, f64>> {
    if manifest.rows.is_empty() {
        return Err(Error::Empty("manifest"));
    }
    let total = manifest.rows.len() as f64;
    Ok(manifest
        .class_counts
        .iter()
        .map(|(w, &c)| (w.clone(), c as f64 / total))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityBin {
    pub low: f64,
    pub high: f64,
    /// Members of `[low, high)` before sampling.
    pub population: usize,
    pub ids: Vec<String>,
}

/// Uniform sample without replacement of up to `n_per_bin` candidates from
/// each half-open bin `[edges[i], edges[i+1])`. Each bin draws from its own
/// seeded stream; sampled ids are listed in candidate order.
pub fn sample_by_similarity_bins(
    candidates: &[ScoredCandidate],
    bin_edges: &[f64],
    n_per_bin: usize,
    seed: u64,
) -> Result<Vec<SimilarityBin>> {
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Invalid(
            "bin edges must be strictly increasing, at least two".into(),
        ));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); bin_edges.len() - 1];
    for (i, c) in candidates.iter().enumerate() {
        if let Some(b) = bin_of(bin_edges, c.score) {
            members[b].push(i);
        }
    }
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(b, mut pool)| {
            let population = pool.len();
            if pool.len() > n_per_bin {
                let mut r =
                    rng::keyed_stream(seed, &[b"similarity-bins", &(b as u64).to_le_bytes()]);
                // partial Fisher-Yates
                for i in 0..n_per_bin {
                    let j = r.random_range(i..pool.len());
                    pool.swap(i, j);
                }
                pool.truncate(n_per_bin);
                pool.sort_unstable();
            }
            SimilarityBin {
                low: bin_edges[b],
                high: bin_edges[b + 1],
                population,
                ids: pool
                    .into_iter()
                    .map(|i| candidates[i].instance_id.clone())
                    .collect(),
            }
        })
        .collect())
}

/// Index of the half-open bin holding `x`, if any.
pub fn bin_of(edges: &[f64], x: f64) -> Option<usize> {
    if edges.is_empty() || !(x >= edges[0]) || !(x < edges[edges.len() - 1]) {
        return None;
    }
    Some(edges.partition_point(|&e| e <= x) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::InstanceRecord;
    use proptest::prelude::*;

    fn cand(id: &str, wnid: &str, score: f64) -> ScoredCandidate {
        ScoredCandidate {
            instance_id: id.into(),
            wnid: wnid.into(),
            score,
        }
    }

    fn corpus_for(cands: &[ScoredCandidate]) -> Corpus {
        let mut ids: Vec<&str> = cands.iter().map(|c| c.instance_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        Corpus::new(
            ids.into_iter()
                .map(|id| InstanceRecord::new(id, ""))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn scoring_dedupes_pairs() {
        let caps = EmbeddingMatrix::from_rows([("i1", vec![1.0f32, 0.0]), ("i2", vec![1.0, 1.0])])
            .unwrap();
        let syn = EmbeddingMatrix::from_rows([
            ("n00000001", vec![1.0f32, 0.0]),
            ("n00000002", vec![0.0, 1.0]),
        ])
        .unwrap();
        let m = |i: &str, w: &str, s| LemmaMatch {
            instance_id: i.into(),
            wnid: w.into(),
            lemma: "x".into(),
            span: (s, s + 1),
        };
        let matches = [
            m("i1", "n00000001", 0),
            m("i1", "n00000001", 4),
            m("i2", "n00000001", 0),
            m("i2", "n00000002", 2),
        ];
        let c = score_candidates(&matches, &caps, &syn).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].score, 1.0);
        assert!((c[1].score - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let bad = [m("i9", "n00000001", 0)];
        assert!(
            matches!(score_candidates(&bad, &caps, &syn), Err(Error::MissingEmbedding(id)) if id == "i9")
        );
    }

    #[test]
    fn sweep_edges() {
        let c = vec![
            cand("a", "x", 0.5),
            cand("b", "x", 0.7),
            cand("c", "y", 0.9),
        ];
        let s = threshold_sweep(&c, &[-1.0, 0.6, 0.8, 0.95]).unwrap();
        let got: Vec<(usize, usize)> = s.iter().map(|p| (p.n_classes, p.n_instances)).collect();
        assert_eq!(got, [(2, 3), (2, 2), (1, 1), (0, 0)]);
        assert!(threshold_sweep(&c, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn multi_label_instance_is_dropped() {
        let c = vec![
            cand("a", "x", 0.9),
            cand("a", "y", 0.85),
            cand("b", "x", 0.95),
        ];
        let corpus = corpus_for(&c);
        let m = assemble(&c, 0.8, &corpus, AssembleOptions::all()).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].instance_id, "b");
        assert_eq!(m.drop_ledger.multi_label, 2);

        // below threshold for "y": no longer multi-label
        let m = assemble(&c, 0.86, &corpus, AssembleOptions::all()).unwrap();
        assert_eq!(m.rows.len(), 2);

        // collapse instead of drop
        let m = assemble(&c, 0.8, &corpus, AssembleOptions::default()).unwrap();
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.rows[0].wnid, "x");
        assert_eq!(m.drop_ledger.multi_label, 1);
    }

    #[test]
    fn flag_gates() {
        let c = vec![
            cand("a", "x", 0.9),
            cand("b", "x", 0.9),
            cand("c", "x", 0.9),
        ];
        let mut records = vec![
            InstanceRecord::new("a", ""),
            InstanceRecord::new("b", ""),
            InstanceRecord::new("c", ""),
        ];
        records[0].nsfw = true;
        records[1].text_in_image = Some(true);
        records[2].text_in_image = Some(false);
        let corpus = Corpus::new(records).unwrap();

        let m = assemble(&c, 0.0, &corpus, AssembleOptions::all()).unwrap();
        assert_eq!(
            m.rows
                .iter()
                .map(|r| r.instance_id.as_str())
                .collect::<Vec<_>>(),
            ["c"]
        );
        assert_eq!((m.drop_ledger.nsfw, m.drop_ledger.text_in_image), (1, 1));

        let m = assemble(&c, 0.0, &corpus, AssembleOptions::default()).unwrap();
        assert_eq!(m.rows.len(), 3);

        let missing = vec![cand("zz", "x", 0.9)];
        assert!(matches!(
            assemble(&missing, 0.0, &corpus, AssembleOptions::all()),
            Err(Error::MissingInstance(_))
        ));
    }

    #[test]
    fn top_k_examples() {
        let rows: Vec<ManifestRow> = (0..3)
            .map(|i| cand(&format!("s{i}"), "small", 0.5))
            .collect();
        let m = DatasetManifest::from_rows(rows, 0.0).unwrap();
        assert_eq!(top_k_per_class(&m, 50).unwrap().rows.len(), 3);

        let rows: Vec<ManifestRow> = (0..100)
            .map(|i| cand(&format!("b{i:03}"), "big", ((i * 37) % 100) as f64 / 100.0))
            .collect();
        let m = DatasetManifest::from_rows(rows.clone(), 0.0).unwrap();
        let top = top_k_per_class(&m, 50).unwrap();
        // full-sort oracle
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
        let mut expect: Vec<&str> = sorted[..50]
            .iter()
            .map(|r| r.instance_id.as_str())
            .collect();
        let mut got: Vec<&str> = top.rows.iter().map(|r| r.instance_id.as_str()).collect();
        expect.sort();
        got.sort();
        assert_eq!(got, expect);
        assert_eq!(top.drop_ledger.top_k, 50);
        assert!(matches!(top_k_per_class(&m, 0), Err(Error::Invalid(_))));
    }

    #[test]
    fn frequencies() {
        let rows = vec![
            cand("1", "a", 1.0),
            cand("2", "a", 1.0),
            cand("3", "a", 1.0),
            cand("4", "b", 1.0),
        ];
        let f = relative_frequencies(&DatasetManifest::from_rows(rows, 0.0).unwrap()).unwrap();
        assert_eq!(f["a"], 0.75);
        assert_eq!(f["b"], 0.25);
        let single = DatasetManifest::from_rows(vec![cand("1", "x", 1.0)], 0.0).unwrap();
        assert_eq!(relative_frequencies(&single).unwrap()["x"], 1.0);
        let empty = DatasetManifest::from_rows(vec![], 0.0).unwrap();
        assert!(matches!(relative_frequencies(&empty), Err(Error::Empty(_))));
    }

    #[test]
    fn bins() {
        let c: Vec<ScoredCandidate> = (0..10)
            .map(|i| cand(&format!("i{i}"), "x", i as f64 / 10.0))
            .collect();
        let b = sample_by_similarity_bins(&c, &[0.0, 0.3, 0.5, 2.0, 3.0], 2, 9).unwrap();
        assert_eq!(b[0].population, 3);
        assert_eq!(b[0].ids.len(), 2);
        assert_eq!(b[1].ids, ["i3", "i4"]);
        assert!(b[3].ids.is_empty());
        assert_eq!(
            b,
            sample_by_similarity_bins(&c, &[0.0, 0.3, 0.5, 2.0, 3.0], 2, 9).unwrap()
        );
        assert!(sample_by_similarity_bins(&c, &[0.0, 0.0], 2, 9).is_err());
    }

    #[test]
    fn bin_lookup_is_half_open() {
        let e = [0.0, 0.5, 1.0];
        assert_eq!(bin_of(&e, 0.0), Some(0));
        assert_eq!(bin_of(&e, 0.5), Some(1));
        assert_eq!(bin_of(&e, 1.0), None);
        assert_eq!(bin_of(&e, -0.1), None);
    }

    proptest! {
        #[test]
        fn sweep_is_monotone(scores in prop::collection::vec((0usize..6, -1.0f64..1.0), 0..60)) {
            let c: Vec<ScoredCandidate> = scores.iter().enumerate()
                .map(|(i, &(w, s))| cand(&format!("i{i}"), &format!("w{w}"), s)).collect();
            let ts: Vec<f64> = (0..21).map(|i| -1.0 + i as f64 * 0.1).collect();
            let s = threshold_sweep(&c, &ts).unwrap();
            for w in s.windows(2) {
                prop_assert!(w[0].n_instances >= w[1].n_instances);
                prop_assert!(w[0].n_classes >= w[1].n_classes);
            }
            for p in &s {
                prop_assert!(p.n_classes == 0 || p.n_instances >= p.n_classes);
            }
        }

        #[test]
        fn ledger_balances(
            rows in prop::collection::vec((0usize..15, 0usize..4, -1.0f64..1.0), 0..60),
            flags in prop::collection::vec((any::<bool>(), prop::option::of(any::<bool>())), 15),
            t in -1.0f64..1.0,
            opts in (any::<bool>(), any::<bool>(), any::<bool>()),
        ) {
            let mut seen = HashSet::new();
            let c: Vec<ScoredCandidate> = rows.into_iter()
                .filter(|&(i, w, _)| seen.insert((i, w)))
                .map(|(i, w, s)| cand(&format!("i{i}"), &format!("w{w}"), s))
                .collect();
            let corpus = Corpus::new((0..15).map(|i| {
                let mut r = InstanceRecord::new(format!("i{i}"), "");
                r.nsfw = flags[i].0;
                r.text_in_image = flags[i].1;
                r
            }).collect()).unwrap();
            let options = AssembleOptions { drop_multi_label: opts.0, drop_nsfw: opts.1, drop_text_in_image: opts.2 };
            let m = assemble(&c, t, &corpus, options).unwrap();
            let l = m.drop_ledger;
            prop_assert_eq!(l.input - l.output, l.dropped());
            prop_assert_eq!(l.output, m.rows.len());
            prop_assert!(m.rows.iter().all(|r| r.score >= t));
            prop_assert!(m.rows.iter().all(|r| c.contains(r)));
            let mut ids = HashSet::new();
            prop_assert!(m.rows.iter().all(|r| ids.insert(r.instance_id.clone())));
            prop_assert_eq!(m.class_counts.values().sum::<usize>(), m.rows.len());

            let k = 1 + (l.output % 3);
            let once = top_k_per_class(&m, k).unwrap();
            let twice = top_k_per_class(&once, k).unwrap();
            prop_assert_eq!(&once.rows, &twice.rows);
            prop_assert_eq!(once.drop_ledger.input - once.drop_ledger.output, once.drop_ledger.dropped());
            if !m.rows.is_empty() {
                let sum: f64 = relative_frequencies(&m).unwrap().values().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }
}
