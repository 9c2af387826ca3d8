//! Small synthetic dataset for demos, CLI tests and benchmarks.
//!
//! Each class gets a random prototype direction. Captions mention a lemma
//! of their class most of the time; their embeddings are noisy copies of
//! the prototype, so caption-synset similarity carries signal. Image
//! embeddings use a per-class noise level so intra-class similarity varies
//! between classes.

use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::corpus::{Corpus, EmbeddingMatrix, InstanceRecord};
use crate::curator::ManifestRow;
use crate::error::Result;
use crate::jsonl;
use crate::rng::{self, Rng};
use crate::taxonomy::{Synset, Taxonomy};

pub const DIM: usize = 32;

/// Parameters of the fixture committed under the CLI crate's tests.
pub const BUNDLED_SEED: u64 = 7;
pub const BUNDLED_INSTANCES: usize = 1000;
pub const BUNDLED_TEST_IMAGES: usize = 120;

pub const TAXONOMY_FILE: &str = "taxonomy.jsonl";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CAPTIONS_FILE: &str = "captions.emb";
pub const SYNSETS_FILE: &str = "synsets.emb";
pub const IMAGES_FILE: &str = "images.emb";
pub const TEST_IMAGES_FILE: &str = "test_images.emb";
pub const TEST_LABELS_FILE: &str = "test_labels.jsonl";

const CLASSES: &[(&str, &[&str], &str, &str)] = &[
    (
        "n02125311",
        &["cougar", "puma", "catamount", "mountain lion"],
        "cougar",
        "large American feline resembling a lion",
    ),
    (
        "n02012849",
        &["crane"],
        "crane",
        "large long-necked wading bird of marshes and plains",
    ),
    (
        "n03126707",
        &["crane"],
        "crane",
        "lifts and moves heavy objects",
    ),
    (
        "n02123045",
        &["tabby", "tabby cat"],
        "tabby",
        "a cat with a grey or tawny coat mottled with black",
    ),
    (
        "n02099601",
        &["golden retriever"],
        "golden retriever",
        "an English breed having a long silky golden coat",
    ),
    (
        "n07747607",
        &["orange"],
        "orange",
        "round yellow to orange fruit of any of several citrus trees",
    ),
    (
        "n04285008",
        &["sports car", "sport car"],
        "sports car",
        "a small low car with a high-powered engine",
    ),
    (
        "n03792782",
        &["mountain bike", "all-terrain bike"],
        "mountain bike",
        "a bicycle with a sturdy frame and fat tires",
    ),
    (
        "n02690373",
        &["airliner"],
        "airliner",
        "a commercial airplane that carries passengers",
    ),
    (
        "n07753592",
        &["banana"],
        "banana",
        "elongated crescent-shaped yellow fruit with soft sweet flesh",
    ),
    (
        "n03954731",
        &["plane", "carpenter's plane", "woodworking plane"],
        "plane",
        "a carpenter's hand tool with an adjustable blade for smoothing",
    ),
    (
        "n01443537",
        &["goldfish", "Carassius_auratus"],
        "goldfish",
        "small golden or orange-red freshwater fishes",
    ),
];

const TEMPLATES: &[&str] = &[
    "a photo of a {}",
    "my {} on the weekend",
    "{} for sale, great condition",
    "close-up of the {} at sunset",
    "look at this {}!",
    "Vintage poster: {} (1970)",
    "the {} next to a {other}",
];

const FILLER: &[&str] = &[
    "untitled",
    "IMG_2041.jpg",
    "stock photo, royalty free",
    "view from the hotel window",
    "happy birthday to me",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub taxonomy: Taxonomy,
    pub corpus: Corpus,
    pub caption_embeddings: EmbeddingMatrix,
    pub synset_embeddings: EmbeddingMatrix,
    pub image_embeddings: EmbeddingMatrix,
    pub test_images: EmbeddingMatrix,
    pub test_labels: Vec<ManifestRow>,
}

fn gaussian(r: &mut Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| r.sample(StandardNormal)).collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn noisy(r: &mut Rng, proto: &[f64], sd: f64) -> Vec<f32> {
    proto
        .iter()
        .map(|p| (p + sd * r.sample::<f64, _>(StandardNormal)) as f32)
        .collect()
}

impl Fixture {
    pub fn generate(seed: u64, n_instances: usize, n_test: usize) -> Result<Self> {
        let synsets: Vec<Synset> = CLASSES
            .iter()
            .map(|(w, l, n, g)| Synset {
                wnid: w.to_string(),
                lemmas: l.iter().map(|s| s.to_string()).collect(),
                name: n.to_string(),
                gloss: g.to_string(),
            })
            .collect();
        let k = synsets.len();
        let taxonomy = Taxonomy::new(synsets)?;

        let mut r = rng::keyed_stream(seed, &[b"prototypes"]);
        let protos: Vec<Vec<f64>> = (0..k).map(|_| unit(gaussian(&mut r, DIM))).collect();
        let spread: Vec<f64> = (0..k).map(|c| 0.08 + 0.02 * c as f64).collect();

        let synset_rows: Vec<(String, Vec<f32>)> = taxonomy
            .iter()
            .zip(&protos)
            .map(|(s, p)| (s.wnid.clone(), noisy(&mut r, p, 0.05)))
            .collect();

        let mut r = rng::keyed_stream(seed, &[b"corpus"]);
        let mut records = Vec::with_capacity(n_instances);
        let mut captions = Vec::with_capacity(n_instances);
        let mut images = Vec::with_capacity(n_instances);
        for i in 0..n_instances {
            let id = format!("img{i:05}");
            let c = r.random_range(0..k);
            let syn = taxonomy.iter().nth(c).expect("class index");
            let roll: f64 = r.random();
            let mut second = None;
            let text = if roll < 0.1 {
                FILLER[r.random_range(0..FILLER.len())].to_string()
            } else {
                let lemma = &syn.lemmas[r.random_range(0..syn.lemmas.len())];
                let o = r.random_range(0..k);
                let other = &taxonomy.iter().nth(o).expect("class index").lemmas[0];
                let t = TEMPLATES[r.random_range(0..TEMPLATES.len())];
                if t.contains("{other}") {
                    second = Some(o);
                }
                let t = t.replacen("{}", lemma, 1).replace("{other}", other);
                if roll > 0.95 {
                    t.to_uppercase()
                } else {
                    t
                }
            };
            let mut rec = InstanceRecord::new(id.clone(), text);
            rec.nsfw = r.random::<f64>() < 0.03;
            rec.text_in_image = match r.random_range(0..10) {
                0 => Some(true),
                1..=5 => Some(false),
                _ => None,
            };
            records.push(rec);
            // caption signal strength varies per instance
            let strength = 0.3 + 0.7 * r.random::<f64>();
            let mut cap: Vec<f64> = protos[c].iter().map(|p| p * strength).collect();
            if let Some(o) = second {
                cap.iter_mut()
                    .zip(&protos[o])
                    .for_each(|(v, p)| *v += 0.6 * p);
            }
            captions.push((id.clone(), noisy(&mut r, &cap, 0.2)));
            images.push((id, noisy(&mut r, &protos[c], spread[c])));
        }

        let mut r = rng::keyed_stream(seed, &[b"test"]);
        let mut test_rows = Vec::with_capacity(n_test);
        let mut test_labels = Vec::with_capacity(n_test);
        for i in 0..n_test {
            let id = format!("test{i:05}");
            let c = i % k;
            test_rows.push((id.clone(), noisy(&mut r, &protos[c], 0.4)));
            test_labels.push(ManifestRow {
                instance_id: id,
                wnid: CLASSES[c].0.to_string(),
                score: 1.0,
            });
        }

        Ok(Fixture {
            taxonomy,
            corpus: Corpus::new(records)?,
            caption_embeddings: EmbeddingMatrix::from_rows(captions)?,
            synset_embeddings: EmbeddingMatrix::from_rows(synset_rows)?,
            image_embeddings: EmbeddingMatrix::from_rows(images)?,
            test_images: EmbeddingMatrix::from_rows(test_rows)?,
            test_labels,
        })
    }

    pub fn bundled() -> Result<Self> {
        Self::generate(BUNDLED_SEED, BUNDLED_INSTANCES, BUNDLED_TEST_IMAGES)
    }

    /// Writes every file into `dir` and returns the paths in a fixed order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let p = |name: &str| dir.join(name);
        self.taxonomy.save(&p(TAXONOMY_FILE))?;
        self.corpus.save(&p(CORPUS_FILE))?;
        self.caption_embeddings.save(&p(CAPTIONS_FILE))?;
        self.synset_embeddings.save(&p(SYNSETS_FILE))?;
        self.image_embeddings.save(&p(IMAGES_FILE))?;
        self.test_images.save(&p(TEST_IMAGES_FILE))?;
        jsonl::write_file(&p(TEST_LABELS_FILE), &self.test_labels)?;
        Ok(Self::files().iter().map(|f| p(f)).collect())
    }

    pub fn files() -> [&'static str; 7] {
        [
            TAXONOMY_FILE,
            CORPUS_FILE,
            CAPTIONS_FILE,
            SYNSETS_FILE,
            IMAGES_FILE,
            TEST_IMAGES_FILE,
            TEST_LABELS_FILE,
        ]
    }
}
