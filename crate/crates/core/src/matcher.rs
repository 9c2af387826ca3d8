//! Lemma matching: which synsets have a lemma occurring in a caption.
//!
//! Captions and lemmas are normalized identically (see [`crate::text`]), then
//! one automaton over all distinct normalized lemmas reports every
//! occurrence, overlapping ones included. An occurrence counts only if the
//! characters on either side of it are absent or non-alphanumeric, so
//! "pumas" does not match "puma". No stemming is applied.

use std::collections::BTreeMap;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::taxonomy::{normalize_lemma, Taxonomy};
use crate::text::{self, NormalizedText};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaMatch {
    pub instance_id: String,
    pub wnid: String,
    /// The normalized lemma that matched.
    pub lemma: String,
    /// Byte offsets into the normalized caption.
    pub span: (usize, usize),
}

pub fn normalize_caption(caption: &str) -> NormalizedText {
    text::normalize(caption)
}

/// True when `start..end` of `text` is not glued to a neighbouring
/// alphanumeric character.
pub fn on_word_boundary(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
}

pub struct Matcher {
    automaton: Option<AhoCorasick>,
    lemmas: Vec<String>,
    /// Sorted wnids per pattern; a lemma may belong to several synsets.
    owners: Vec<Vec<String>>,
}

impl Matcher {
    pub fn new(taxonomy: &Taxonomy) -> Self {
        let mut by_lemma: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for s in taxonomy {
            for lemma in &s.lemmas {
                // Taxonomy validation guarantees non-empty lemmas.
                let Ok(n) = normalize_lemma(lemma) else {
                    continue;
                };
                let owners = by_lemma.entry(n).or_default();
                if !owners.contains(&s.wnid) {
                    owners.push(s.wnid.clone());
                }
            }
        }
        let (lemmas, mut owners): (Vec<String>, Vec<Vec<String>>) = by_lemma.into_iter().unzip();
        owners.iter_mut().for_each(|o| o.sort());
        let automaton = (!lemmas.is_empty()).then(|| {
            AhoCorasickBuilder::new()
                .match_kind(MatchKind::Standard)
                .build(&lemmas)
                .expect("automaton over normalized lemmas")
        });
        Matcher {
            automaton,
            lemmas,
            owners,
        }
    }

    /// Number of distinct normalized lemmas.
    pub fn pattern_count(&self) -> usize {
        self.lemmas.len()
    }

    pub fn lemmas(&self) -> &[String] {
        &self.lemmas
    }

    pub fn owners_of(&self, lemma: &str) -> &[String] {
        match self.lemmas.binary_search_by(|l| l.as_str().cmp(lemma)) {
            Ok(i) => &self.owners[i],
            Err(_) => &[],
        }
    }

    /// `(start, end, pattern)` for every boundary-respecting occurrence in an
    /// already-normalized caption, ordered by start then end.
    pub fn occurrences(&self, normalized: &str) -> Vec<(usize, usize, usize)> {
        let Some(ac) = &self.automaton else {
            return Vec::new();
        };
        let mut out: Vec<(usize, usize, usize)> = ac
            .find_overlapping_iter(normalized)
            .filter(|m| on_word_boundary(normalized, m.start(), m.end()))
            .map(|m| (m.start(), m.end(), m.pattern().as_usize()))
            .collect();
        out.sort_unstable();
        out
    }

    /// All matches in one caption, ordered by span start, then wnid.
    pub fn match_caption(&self, instance_id: &str, caption: &str) -> Vec<LemmaMatch> {
        let normalized = normalize_caption(caption).text;
        let mut out: Vec<LemmaMatch> = self
            .occurrences(&normalized)
            .into_iter()
            .flat_map(|(start, end, p)| {
                self.owners[p].iter().map(move |wnid| LemmaMatch {
                    instance_id: instance_id.to_string(),
                    wnid: wnid.clone(),
                    lemma: self.lemmas[p].clone(),
                    span: (start, end),
                })
            })
            .collect();
        out.sort_by(|a, b| (a.span.0, &a.wnid, a.span.1).cmp(&(b.span.0, &b.wnid, b.span.1)));
        out
    }
}

pub fn build_matcher(taxonomy: &Taxonomy) -> Matcher {
    Matcher::new(taxonomy)
}

/// Matches over the whole corpus in corpus order. Captions are scanned in
/// parallel and merged back in order, so the result does not depend on the
/// worker count.
pub fn find_matches(matcher: &Matcher, corpus: &Corpus) -> Vec<LemmaMatch> {
    corpus
        .records()
        .par_iter()
        .map(|r| matcher.match_caption(&r.id, &r.text))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
