//! Text-only curation of image-text datasets.
//!
//! Captions are matched against a taxonomy's lemmas, scored by caption to
//! synset-text similarity and thresholded into a labelled manifest without
//! ever looking at image pixels. The crate also carries the evaluation and
//! diagnostic tooling used to compare such datasets, and a small causal
//! simulator of text-based selection.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod causalsim;
pub mod corpus;
pub mod curator;
pub mod diagnostics;
pub mod error;
pub mod evalmetrics;
pub mod fixture;
pub mod jsonl;
pub mod matcher;
pub mod rng;
pub mod stats;
pub mod taxonomy;
pub mod text;
pub mod vectorops;

pub use corpus::{Corpus, EmbeddingMatrix, InstanceRecord};
pub use curator::{AssembleOptions, DatasetManifest, DropLedger, ManifestRow, ScoredCandidate};
pub use error::{Error, Result};
pub use evalmetrics::{ClassStat, PredictionRecord};
pub use matcher::{LemmaMatch, Matcher};
pub use taxonomy::{Synset, Taxonomy};
pub use vectorops::Neighbor;
