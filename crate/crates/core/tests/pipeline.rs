//! Library-level pipeline on the synthetic fixture, run under different
//! thread counts.

use rayon::ThreadPoolBuilder;
use textcurate_core::curator::{self, AssembleOptions};
use textcurate_core::diagnostics::{self, BootstrapConfig};
use textcurate_core::evalmetrics;
use textcurate_core::fixture::Fixture;
use textcurate_core::{matcher, DatasetManifest};

#[derive(Debug, PartialEq)]
struct Outputs {
    n_matches: usize,
    candidate_bits: Vec<(String, String, u64)>,
    manifest: DatasetManifest,
    recall_bits: Vec<u64>,
    diff_bits: Vec<(u64, u64, u64)>,
}

fn pipeline(f: &Fixture) -> Outputs {
    let m = matcher::build_matcher(&f.taxonomy);
    let matches = matcher::find_matches(&m, &f.corpus);
    let cands =
        curator::score_candidates(&matches, &f.caption_embeddings, &f.synset_embeddings).unwrap();
    let a = curator::assemble(&cands, 0.4, &f.corpus, AssembleOptions::all()).unwrap();
    let b = curator::assemble(&cands, 0.55, &f.corpus, AssembleOptions::default()).unwrap();
    let labels = DatasetManifest::from_rows(f.test_labels.clone(), 1.0).unwrap();
    let preds = evalmetrics::zero_shot_predict(&f.test_images, &f.synset_embeddings, 5).unwrap();
    let recall = evalmetrics::per_class_recall(&labels, &preds, 1).unwrap();
    let sa = diagnostics::intra_class_sims(&a, &f.image_embeddings).unwrap();
    let sb = diagnostics::intra_class_sims(&b, &f.image_embeddings).unwrap();
    let cfg = BootstrapConfig {
        replicates: 200,
        seed: 9,
        alpha: 0.05,
    };
    let report = diagnostics::per_class_mean_diff_ci(&sa, &sb, &cfg).unwrap();
    Outputs {
        n_matches: matches.len(),
        candidate_bits: cands
            .iter()
            .map(|c| (c.instance_id.clone(), c.wnid.clone(), c.score.to_bits()))
            .collect(),
        manifest: a,
        recall_bits: recall.iter().map(|s| s.value.to_bits()).collect(),
        diff_bits: report
            .stats
            .iter()
            .map(|s| (s.value.to_bits(), s.ci_low.to_bits(), s.ci_high.to_bits()))
            .collect(),
    }
}

fn with_threads(n: usize, f: &Fixture) -> Outputs {
    ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(|| pipeline(f))
}

#[test]
fn thread_count_does_not_change_results() {
    let f = Fixture::generate(3, 600, 48).unwrap();
    let one = with_threads(1, &f);
    assert_eq!(one, with_threads(3, &f));
    assert_eq!(one, with_threads(8, &f));
}

#[test]
fn stricter_assembly_is_a_subset() {
    let f = Fixture::generate(4, 600, 12).unwrap();
    let m = matcher::build_matcher(&f.taxonomy);
    let cands = curator::score_candidates(
        &matcher::find_matches(&m, &f.corpus),
        &f.caption_embeddings,
        &f.synset_embeddings,
    )
    .unwrap();
    // dropping multi-label instances is not monotone: a second label can
    // fall below the stricter threshold and release the instance
    let opts = AssembleOptions {
        drop_multi_label: false,
        ..AssembleOptions::all()
    };
    let loose = curator::assemble(&cands, 0.3, &f.corpus, opts).unwrap();
    let strict = curator::assemble(&cands, 0.6, &f.corpus, opts).unwrap();
    for r in &strict.rows {
        assert!(loose.rows.contains(r), "{r:?}");
    }
    for m in [&loose, &strict] {
        assert_eq!(
            m.drop_ledger.input - m.drop_ledger.dropped(),
            m.drop_ledger.output
        );
    }
}

#[test]
fn every_match_is_a_boundary_respecting_lemma() {
    let f = Fixture::generate(5, 400, 1).unwrap();
    let m = matcher::build_matcher(&f.taxonomy);
    for hit in matcher::find_matches(&m, &f.corpus) {
        let caption =
            matcher::normalize_caption(&f.corpus.get(&hit.instance_id).unwrap().text).text;
        let (s, e) = hit.span;
        assert_eq!(&caption[s..e], hit.lemma);
        assert!(matcher::on_word_boundary(&caption, s, e));
        assert!(m.owners_of(&hit.lemma).contains(&hit.wnid));
    }
}
