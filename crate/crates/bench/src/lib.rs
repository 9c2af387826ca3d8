//! Inputs shared by the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textcurate_core::diagnostics::ClassSimilaritySet;
use textcurate_core::EmbeddingMatrix;

/// `count` uniform random rows of width `dim`, ids `r00000..`.
pub fn random_matrix(count: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..count).map(|i| {
        let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        (format!("r{i:05}"), v)
    });
    EmbeddingMatrix::from_rows(rows).expect("random rows are finite and non-zero")
}

/// One class of `n` random images.
pub fn random_class(n: usize, dim: usize, seed: u64) -> ClassSimilaritySet {
    let m = random_matrix(n, dim, seed);
    let rows: Vec<&[f32]> = (0..n).map(|i| m.row(i)).collect();
    ClassSimilaritySet::from_vectors("n00000001", &rows).expect("valid rows")
}
