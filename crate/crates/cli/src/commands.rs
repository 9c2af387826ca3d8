use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use textcurate_core::causalsim::{self, SimulationConfig};
use textcurate_core::curator::{self, DatasetManifest, ScoredCandidate};
use textcurate_core::diagnostics::{self, BootstrapConfig, DatasetComparison};
use textcurate_core::evalmetrics::{self, ClassStat, PredictionRecord, WeightedAccuracy};
use textcurate_core::matcher;
use textcurate_core::{jsonl, Corpus, EmbeddingMatrix, Error, Taxonomy};

use crate::args::*;
use crate::error::{config, CliResult};
use crate::run::Run;

/// `start:stop:step`, inclusive of `stop` up to rounding; values are
/// rounded to 1e-9 so decimal steps print cleanly.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = match parts.as_slice() {
        [a, b, s] => [a, b, s]
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| config(format!("range {spec}: {e}")))?,
        _ => return Err(config(format!("range {spec}: expected start:stop:step"))),
    };
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(config(format!(
            "range {spec}: need finite start <= stop and step > 0"
        )));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(config(format!("range {spec}: too many points")));
    }
    Ok((0..=n)
        .map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn parse_ks(spec: &str) -> CliResult<Vec<usize>> {
    let ks = spec
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| config(format!("--k {spec}: {e}")))?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(config("--k values must be positive"));
    }
    Ok(ks)
}

fn load_manifest(run: &mut Run, path: &Path) -> CliResult<DatasetManifest> {
    let rows = run.input(path)?;
    let sidecar = path.with_extension("json");
    let sidecar = if sidecar.is_file() && sidecar != path {
        Some(run.input(&sidecar)?.to_path_buf())
    } else {
        None
    };
    Ok(DatasetManifest::load(rows, sidecar.as_deref())?)
}

fn load_matrix(run: &mut Run, path: &Path) -> CliResult<EmbeddingMatrix> {
    Ok(EmbeddingMatrix::load(run.input(path)?)?)
}

fn save_manifest(run: &mut Run, mut m: DatasetManifest) -> CliResult<()> {
    m.config_digest = run.config_digest.clone();
    let rows = run.output("manifest.jsonl");
    let side = run.output("manifest.json");
    m.save(&rows, &side)?;
    Ok(())
}

fn stats_csv(stats: &[ClassStat]) -> Vec<u8> {
    let mut buf = Vec::new();
    evalmetrics::write_stats_csv(&mut buf, stats).expect("write to memory");
    buf
}

pub fn run_match(run: &mut Run, a: &MatchArgs) -> CliResult<()> {
    let taxonomy = Taxonomy::load(run.input(&a.taxonomy)?)?;
    let corpus = Corpus::load(run.input(&a.corpus)?)?;
    let m = matcher::build_matcher(&taxonomy);
    let matches = matcher::find_matches(&m, &corpus);
    jsonl::write_file(&run.output("matches.jsonl"), &matches)?;
    if let (Some(c), Some(s)) = (&a.caption_embeddings, &a.synset_embeddings) {
        let captions = load_matrix(run, c)?;
        let synsets = load_matrix(run, s)?;
        let scored = curator::score_candidates(&matches, &captions, &synsets)?;
        jsonl::write_file(&run.output("candidates.jsonl"), &scored)?;
    }
    Ok(())
}

pub fn run_sweep(run: &mut Run, a: &SweepArgs) -> CliResult<()> {
    let thresholds = parse_range(&a.thresholds)?;
    let candidates: Vec<ScoredCandidate> = jsonl::read_all(run.input(&a.candidates)?)?;
    let points = curator::threshold_sweep(&candidates, &thresholds)?;
    let mut buf = Vec::new();
    curator::write_sweep_csv(&mut buf, &points).expect("write to memory");
    run.write("sweep.csv", &buf)
}

pub fn run_assemble(run: &mut Run, a: &AssembleArgs) -> CliResult<()> {
    if !(-1.0..=1.0).contains(&a.threshold) {
        return Err(config(format!(
            "--threshold {} outside [-1, 1]",
            a.threshold
        )));
    }
    if a.top_k == Some(0) {
        return Err(config("--top-k must be at least 1"));
    }
    let candidates: Vec<ScoredCandidate> = jsonl::read_all(run.input(&a.candidates)?)?;
    let corpus = Corpus::load(run.input(&a.corpus)?)?;
    let options = curator::AssembleOptions {
        drop_multi_label: a.drop_multi_label,
        drop_nsfw: a.drop_nsfw,
        drop_text_in_image: a.drop_text_in_image,
    };
    let mut manifest = curator::assemble(&candidates, a.threshold, &corpus, options)?;
    if let Some(k) = a.top_k {
        manifest = curator::top_k_per_class(&manifest, k)?;
    }
    save_manifest(run, manifest)
}

#[derive(Serialize)]
struct BaselineSummary {
    equally_weighted: f64,
    weighted: WeightedAccuracy,
    /// Classes whose recall-difference interval lies wholly below or above zero.
    diff: DatasetComparison,
}

#[derive(Serialize)]
struct KSummary {
    k: usize,
    equally_weighted: f64,
    weighted: WeightedAccuracy,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineSummary>,
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    weights: &'a str,
    n_instances: usize,
    results: Vec<KSummary>,
}

fn eval_weights(
    run: &mut Run,
    a: &EvalArgs,
    classes: &[ClassStat],
) -> CliResult<BTreeMap<String, f64>> {
    match a.weights.as_str() {
        "uniform" => Ok(classes.iter().map(|s| (s.wnid.clone(), 1.0)).collect()),
        "freq" => {
            let path = a
                .train_manifest
                .as_ref()
                .ok_or_else(|| config("--weights freq needs --train-manifest"))?;
            let train = load_manifest(run, path)?;
            let mut w = curator::relative_frequencies(&train)?;
            for s in classes {
                w.entry(s.wnid.clone()).or_insert(0.0);
            }
            Ok(w)
        }
        file => {
            let p = run.input(Path::new(file))?;
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_slice(&bytes).map_err(|e| {
                Error::Parse {
                    path: p.into(),
                    line: e.line(),
                    message: e.to_string(),
                }
                .into()
            })
        }
    }
}

pub fn run_eval(run: &mut Run, a: &EvalArgs) -> CliResult<()> {
    let ks = parse_ks(&a.k)?;
    let labels = load_manifest(run, &a.manifest)?;
    let predictions: Vec<PredictionRecord> =
        match (&a.predictions, &a.image_embeddings, &a.synset_embeddings) {
            (Some(p), None, _) => evalmetrics::load_predictions(run.input(p)?)?,
            (None, Some(i), Some(s)) => {
                let images = load_matrix(run, i)?;
                let synsets = load_matrix(run, s)?;
                let k = ks
                    .iter()
                    .copied()
                    .max()
                    .expect("non-empty")
                    .min(synsets.count());
                let preds = evalmetrics::zero_shot_predict(&images, &synsets, k)?;
                jsonl::write_file(&run.output("predictions.jsonl"), &preds)?;
                preds
            }
            _ => {
                return Err(config(
                    "eval needs --predictions or both --image-embeddings and --synset-embeddings",
                ))
            }
        };
    let baseline = match &a.baseline_predictions {
        Some(p) => Some(evalmetrics::load_predictions(run.input(p)?)?),
        None => None,
    };

    let mut results = Vec::new();
    let mut weights = None;
    for &k in &ks {
        let stats = evalmetrics::per_class_recall(&labels, &predictions, k)?;
        if weights.is_none() {
            weights = Some(eval_weights(run, a, &stats)?);
        }
        let w = weights.as_ref().expect("set above");
        run.write(&format!("recall_at_{k}.csv"), &stats_csv(&stats))?;
        let baseline = match &baseline {
            Some(b) => {
                let bstats = evalmetrics::per_class_recall(&labels, b, k)?;
                let diffs = evalmetrics::per_class_recall_diff_ci(&stats, &bstats)?;
                run.write(&format!("recall_diff_at_{k}.csv"), &stats_csv(&diffs))?;
                Some(BaselineSummary {
                    equally_weighted: evalmetrics::equally_weighted_accuracy(&bstats)?,
                    weighted: evalmetrics::weighted_accuracy(&bstats, w)?,
                    diff: diagnostics::summarize_diffs(&diffs),
                })
            }
            None => None,
        };
        results.push(KSummary {
            k,
            equally_weighted: evalmetrics::equally_weighted_accuracy(&stats)?,
            weighted: evalmetrics::weighted_accuracy(&stats, w)?,
            baseline,
        });
    }
    run.write_json(
        "accuracy.json",
        &EvalSummary {
            weights: &a.weights,
            n_instances: labels.len(),
            results,
        },
    )
}

fn bootstrap(run: &Run, replicates: usize) -> CliResult<BootstrapConfig> {
    if replicates == 0 {
        return Err(config("--replicates must be at least 1"));
    }
    Ok(BootstrapConfig {
        replicates,
        seed: run.seed,
        ..Default::default()
    })
}

pub fn run_diagnose(run: &mut Run, d: &Diagnose) -> CliResult<()> {
    match d {
        Diagnose::Intra(a) => {
            let m = load_manifest(run, &a.manifest)?;
            let images = load_matrix(run, &a.image_embeddings)?;
            let sets = diagnostics::intra_class_sims(&m, &images)?;
            let mut csv = String::from("wnid,n,pairs,mean\n");
            for s in &sets {
                let mean = if s.is_degenerate() {
                    String::new()
                } else {
                    s.mean().to_string()
                };
                csv.push_str(&format!("{},{},{},{}\n", s.wnid, s.n, s.sims.len(), mean));
            }
            run.write("intra.csv", csv.as_bytes())
        }
        Diagnose::Compare(a) => {
            let cfg = bootstrap(run, a.replicates)?;
            let ma = load_manifest(run, &a.manifest_a)?;
            let ia = load_matrix(run, &a.images_a)?;
            let mb = load_manifest(run, &a.manifest_b)?;
            let ib = load_matrix(run, &a.images_b)?;
            let sa = diagnostics::intra_class_sims(&ma, &ia)?;
            let sb = diagnostics::intra_class_sims(&mb, &ib)?;
            let (cmp, report) = diagnostics::compare_datasets(&sa, &sb, &cfg)?;
            run.write("mean_diff.csv", &stats_csv(&report.stats))?;
            run.write_json(
                "compare.json",
                &serde_json::json!({ "comparison": cmp, "skipped": report.skipped }),
            )
        }
        Diagnose::FalseClass(a) => {
            let edges = parse_range(&a.bins)?;
            if edges.len() < 2 {
                return Err(config("--bins needs at least two edges"));
            }
            let m = load_manifest(run, &a.manifest)?;
            let captions = load_matrix(run, &a.caption_embeddings)?;
            let synsets = load_matrix(run, &a.synset_embeddings)?;
            let texts = m
                .rows
                .iter()
                .map(|r| Ok((captions.get(&r.instance_id)?, r.wnid.as_str())))
                .collect::<Result<Vec<_>, Error>>()?;
            let bins = diagnostics::binned_false_class_means(&texts, &synsets, &edges)?;
            let mut csv = String::from("low,high,count,mean\n");
            for b in &bins {
                let mean = b.mean.map(|v| v.to_string()).unwrap_or_default();
                csv.push_str(&format!("{},{},{},{}\n", b.low, b.high, b.count, mean));
            }
            run.write("false_class.csv", csv.as_bytes())
        }
        Diagnose::NearestText(a) => {
            if !(-1.0..=1.0).contains(&a.min_sim) {
                return Err(config(format!("--min-sim {} outside [-1, 1]", a.min_sim)));
            }
            let queries = load_manifest(run, &a.queries)?;
            let qemb = load_matrix(run, &a.query_embeddings)?;
            let corpus = load_matrix(run, &a.corpus_embeddings)?;
            let q = queries
                .rows
                .iter()
                .map(|r| Ok((qemb.get(&r.instance_id)?, r.wnid.as_str())))
                .collect::<Result<Vec<_>, Error>>()?;
            let m = diagnostics::nearest_text_dataset(&q, &corpus, a.min_sim)?;
            save_manifest(run, m)
        }
        Diagnose::CrossModal(a) => {
            let cfg = bootstrap(run, a.replicates)?;
            let m = load_manifest(run, &a.manifest)?;
            let images = load_matrix(run, &a.image_embeddings)?;
            let synsets = load_matrix(run, &a.synset_embeddings)?;
            let stats = diagnostics::cross_modal_class_stats(&m, &images, &synsets, &cfg)?;
            run.write("cross_modal.csv", &stats_csv(&stats))
        }
        Diagnose::Correlate(a) => {
            let x = read_column(run, &a.x, &a.x_column)?;
            let y = read_column(run, &a.y, &a.y_column)?;
            let shared: Vec<&String> = x.keys().filter(|k| y.contains_key(*k)).collect();
            let xs: Vec<f64> = shared.iter().map(|k| x[*k]).collect();
            let ys: Vec<f64> = shared.iter().map(|k| y[*k]).collect();
            let rho = diagnostics::spearman(&xs, &ys)?;
            run.write_json(
                "correlate.json",
                &serde_json::json!({ "n": shared.len(), "spearman": rho, "classes": shared }),
            )
        }
    }
}

/// `wnid → value` from a per-class CSV. Rows with an empty value are skipped.
fn read_column(run: &mut Run, path: &Path, column: &str) -> CliResult<BTreeMap<String, f64>> {
    let p = run.input(path)?;
    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: p.into(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| parse_err(1, format!("no column {name}")))
    };
    let (wi, vi) = (col("wnid")?, col(column)?);
    let mut out = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let (Some(w), Some(v)) = (cells.get(wi), cells.get(vi)) else {
            return Err(parse_err(i + 2, "short row".into()).into());
        };
        if v.is_empty() {
            continue;
        }
        let v: f64 = v.parse().map_err(|e| parse_err(i + 2, format!("{e}")))?;
        if out.insert(w.to_string(), v).is_some() {
            return Err(parse_err(i + 2, format!("duplicate wnid {w}")).into());
        }
    }
    Ok(out)
}

pub fn load_simulation(path: &Path, seed: Option<u64>) -> CliResult<SimulationConfig> {
    let bytes = std::fs::read(path)
        .map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: SimulationConfig = serde_json::from_slice(&bytes)
        .map_err(|e| config(format!("config {}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.generator.seed = s;
    }
    cfg.generator
        .validate()
        .map_err(|e| config(e.to_string()))?;
    if cfg.n == 0 {
        return Err(config("simulation needs n >= 1"));
    }
    Ok(cfg)
}

pub fn run_simulate(run: &mut Run, path: &Path, cfg: &SimulationConfig) -> CliResult<()> {
    run.input(path)?;
    let report = causalsim::run_simulation(cfg)?;
    run.write_json("simulation.json", &report)?;
    let g = &report.gap;
    let mut csv = String::from("dim,baseline,text,image\n");
    for d in 0..g.baseline_var.len() {
        csv.push_str(&format!(
            "{d},{},{},{}\n",
            g.baseline_var[d], g.per_dim_var_text[d], g.per_dim_var_image[d]
        ));
    }
    run.write("variance.csv", csv.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(
            parse_range("0.5:0.9:0.1").unwrap(),
            [0.5, 0.6, 0.7, 0.8, 0.9]
        );
        assert_eq!(parse_range("-1:1:1").unwrap(), [-1.0, 0.0, 1.0]);
        assert_eq!(parse_range("0.3:0.3:0.1").unwrap(), [0.3]);
        for bad in ["0:1", "1:0:0.1", "0:1:0", "a:1:0.1", "0:1:-0.1"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ks() {
        assert_eq!(parse_ks("1,5").unwrap(), [1, 5]);
        assert!(parse_ks("0").is_err());
        assert!(parse_ks("1,x").is_err());
    }
}
