//! Exact cosine-similarity kernels.
//!
//! Inputs are f32; every dot product and norm accumulates in f64 in index
//! order, so `cosine(a, b) == cosine(b, a)` bit for bit. Matrix scans score
//! each row independently and order results by score descending, then id
//! ascending, which makes parallel and serial scans identical.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::corpus::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Slack allowed outside [-1, 1] from rounding.
pub const SCORE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: String,
    pub score: f64,
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

#[inline]
pub fn norm(a: &[f32]) -> f64 {
    a.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector(String::from(if na == 0.0 {
            "lhs"
        } else {
            "rhs"
        })));
    }
    Ok(dot(a, b) / (na * nb))
}

/// A query vector with its norm cached for repeated scoring.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    values: &'a [f32],
    norm: f64,
}

impl<'a> Query<'a> {
    pub fn new(values: &'a [f32]) -> Result<Self> {
        let n = norm(values);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector("query".into()));
        }
        Ok(Query { values, norm: n })
    }

    fn check(&self, m: &EmbeddingMatrix) -> Result<()> {
        if self.values.len() != m.dim() {
            return Err(Error::DimMismatch {
                left: self.values.len(),
                right: m.dim(),
            });
        }
        Ok(())
    }

    /// Cosine against another query; identical to `cosine`.
    #[inline]
    pub fn score(&self, other: &Query<'_>) -> f64 {
        dot(self.values, other.values) / (self.norm * other.norm)
    }

    /// Cosine against row `i` of `m`; identical to `cosine(query, m.row(i))`.
    #[inline]
    pub fn score_row(&self, m: &EmbeddingMatrix, i: usize) -> f64 {
        dot(self.values, m.row(i)) / (self.norm * m.norm(i))
    }
}

/// Ranking order: higher score first, then lexicographically smaller id.
#[inline]
pub fn rank_order(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score
        .partial_cmp(&a_score)
        .expect("finite scores")
        .then_with(|| a_id.cmp(b_id))
}

/// Scores of `query` against every row, in row order.
pub fn scan(query: &[f32], m: &EmbeddingMatrix) -> Result<Vec<f64>> {
    let q = Query::new(query)?;
    q.check(m)?;
    Ok((0..m.count())
        .into_par_iter()
        .map(|i| q.score_row(m, i))
        .collect())
}

/// Top-`k` rows of `m` by cosine to `query`.
pub fn argmax_class(query: &[f32], m: &EmbeddingMatrix, k: usize) -> Result<Vec<Neighbor>> {
    if k == 0 || k > m.count() {
        return Err(Error::KOutOfRange { k, max: m.count() });
    }
    let scores = scan(query, m)?;
    Ok(top_k_of(&scores, m, k))
}

pub(crate) fn top_k_of(scores: &[f64], m: &EmbeddingMatrix, k: usize) -> Vec<Neighbor> {
    let cmp = |&a: &usize, &b: &usize| rank_order(scores[a], m.id(a), scores[b], m.id(b));
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    idx.into_iter()
        .map(|i| Neighbor {
            id: m.id(i).to_string(),
            score: scores[i],
        })
        .collect()
}

/// Best row of `m` for `query`; equal to `argmax_class(query, m, 1)[0]`.
pub fn nearest_neighbor(query: &[f32], m: &EmbeddingMatrix) -> Result<Neighbor> {
    if m.is_empty() {
        return Err(Error::Empty("nearest-neighbor matrix"));
    }
    let q = Query::new(query)?;
    q.check(m)?;
    let best = (0..m.count())
        .into_par_iter()
        .map(|i| (i, q.score_row(m, i)))
        .reduce_with(|a, b| match rank_order(a.1, m.id(a.0), b.1, m.id(b.0)) {
            Ordering::Greater => b,
            _ => a,
        })
        .expect("non-empty");
    Ok(Neighbor {
        id: m.id(best.0).to_string(),
        score: best.1,
    })
}

/// `argmax_class` for every row of `queries`, in row order.
pub fn argmax_batch(
    queries: &EmbeddingMatrix,
    classes: &EmbeddingMatrix,
    k: usize,
) -> Result<Vec<Vec<Neighbor>>> {
    if k == 0 || k > classes.count() {
        return Err(Error::KOutOfRange {
            k,
            max: classes.count(),
        });
    }
    if queries.dim() != classes.dim() && !queries.is_empty() {
        return Err(Error::DimMismatch {
            left: queries.dim(),
            right: classes.dim(),
        });
    }
    (0..queries.count())
        .into_par_iter()
        .map(|i| {
            let q = Query {
                values: queries.row(i),
                norm: queries.norm(i),
            };
            let scores: Vec<f64> = (0..classes.count())
                .map(|j| q.score_row(classes, j))
                .collect();
            Ok(top_k_of(&scores, classes, k))
        })
        .collect()
}
