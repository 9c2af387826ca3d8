use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Text-only curation of image-text datasets against a synset taxonomy.
#[derive(Debug, Parser)]
#[command(name = "textcurate", version)]
pub struct Cli {
    /// JSON object of flag values for the subcommand; flags on the command line win.
    /// For `simulate` this is the simulation config.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Find lemma mentions in captions; optionally score them.
    Match(MatchArgs),
    /// Count classes and instances surviving each threshold.
    Sweep(SweepArgs),
    /// Threshold and filter scored candidates into a manifest.
    Assemble(AssembleArgs),
    /// Per-class recall@k and aggregate accuracies.
    Eval(EvalArgs),
    /// Selection-bias diagnostics.
    #[command(subcommand)]
    Diagnose(Diagnose),
    /// Run the selection simulator.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Match(_) => "match",
            Command::Sweep(_) => "sweep",
            Command::Assemble(_) => "assemble",
            Command::Eval(_) => "eval",
            Command::Diagnose(d) => d.name(),
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MatchArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Caption embeddings; with --synset-embeddings also writes candidates.jsonl.
    #[arg(long, requires = "synset_embeddings")]
    pub caption_embeddings: Option<PathBuf>,
    #[arg(long, requires = "caption_embeddings")]
    pub synset_embeddings: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    /// Inclusive range `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub thresholds: String,
}

#[derive(Debug, Args, Serialize)]
pub struct AssembleArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long)]
    pub drop_multi_label: bool,
    #[arg(long)]
    pub drop_nsfw: bool,
    #[arg(long)]
    pub drop_text_in_image: bool,
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Labelled evaluation set (manifest rows).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Ranked predictions; otherwise zero-shot from --image-embeddings and --synset-embeddings.
    #[arg(long, conflicts_with = "image_embeddings")]
    pub predictions: Option<PathBuf>,
    #[arg(long, requires = "synset_embeddings")]
    pub image_embeddings: Option<PathBuf>,
    #[arg(long)]
    pub synset_embeddings: Option<PathBuf>,
    /// `uniform`, `freq` (needs --train-manifest) or a JSON file of wnid weights.
    #[arg(long, default_value = "uniform")]
    pub weights: String,
    /// Curated training manifest whose class frequencies give `freq` weights.
    #[arg(long)]
    pub train_manifest: Option<PathBuf>,
    /// Comma-separated k values.
    #[arg(long, default_value = "1,5")]
    pub k: String,
    /// Second prediction set; writes per-class recall differences.
    #[arg(long)]
    pub baseline_predictions: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnose {
    /// Pairwise image similarity per class.
    Intra(IntraArgs),
    /// Per-class mean similarity differences between two datasets.
    Compare(CompareArgs),
    /// False-class proportion binned by caption-synset similarity.
    FalseClass(FalseClassArgs),
    /// Dataset of nearest corpus captions to labelled query captions.
    NearestText(NearestTextArgs),
    /// Image to synset-text similarity per class.
    CrossModal(CrossModalArgs),
    /// Spearman correlation between two per-class statistics files.
    Correlate(CorrelateArgs),
}

impl Diagnose {
    pub fn name(&self) -> &'static str {
        match self {
            Diagnose::Intra(_) => "diagnose intra",
            Diagnose::Compare(_) => "diagnose compare",
            Diagnose::FalseClass(_) => "diagnose false-class",
            Diagnose::NearestText(_) => "diagnose nearest-text",
            Diagnose::CrossModal(_) => "diagnose cross-modal",
            Diagnose::Correlate(_) => "diagnose correlate",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IntraArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub image_embeddings: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub manifest_a: PathBuf,
    #[arg(long)]
    pub images_a: PathBuf,
    #[arg(long)]
    pub manifest_b: PathBuf,
    #[arg(long)]
    pub images_b: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FalseClassArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub caption_embeddings: PathBuf,
    #[arg(long)]
    pub synset_embeddings: PathBuf,
    /// Bin edges as `start:stop:step`.
    #[arg(long, default_value = "0:1:0.1", allow_hyphen_values = true)]
    pub bins: String,
}

#[derive(Debug, Args, Serialize)]
pub struct NearestTextArgs {
    /// Manifest rows naming each query id and its class.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub query_embeddings: PathBuf,
    #[arg(long)]
    pub corpus_embeddings: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub min_sim: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CrossModalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub image_embeddings: PathBuf,
    #[arg(long)]
    pub synset_embeddings: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelateArgs {
    /// Per-class CSV with a `wnid` column.
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value = "value")]
    pub x_column: String,
    #[arg(long, default_value = "value")]
    pub y_column: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {}
