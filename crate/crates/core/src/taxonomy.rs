//! Synset taxonomy: loading, validation, and the per-synset query text.
//!
//! The on-disk form is JSONL, one synset per line:
//!
//! ```text
//! {"wnid":"n02125494","lemmas":["cougar","puma"],"name":"cougar","gloss":"large American feline resembling lion"}
//! ```

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::text;

/// Separator placed between a synset's name and gloss in its query text.
pub const SYNSET_TEXT_SEPARATOR: &str = ": ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synset {
    pub wnid: String,
    pub lemmas: Vec<String>,
    pub name: String,
    pub gloss: String,
}

impl Synset {
    pub fn validate(&self) -> Result<()> {
        if !is_valid_wnid(&self.wnid) {
            return Err(Error::InvalidWnid(self.wnid.clone()));
        }
        if self.lemmas.is_empty() || self.lemmas.iter().any(|l| l.trim().is_empty()) {
            return Err(Error::EmptyLemma(self.wnid.clone()));
        }
        Ok(())
    }

    /// `<name>: <gloss>`, the text embedded for similarity scoring.
    pub fn text(&self) -> String {
        synset_text(&self.name, &self.gloss)
    }
}

pub fn synset_text(name: &str, gloss: &str) -> String {
    let mut s = String::with_capacity(name.len() + SYNSET_TEXT_SEPARATOR.len() + gloss.len());
    s.push_str(name);
    s.push_str(SYNSET_TEXT_SEPARATOR);
    s.push_str(gloss);
    s
}

pub fn is_valid_wnid(wnid: &str) -> bool {
    let b = wnid.as_bytes();
    b.len() == 9 && b[0] == b'n' && b[1..].iter().all(u8::is_ascii_digit)
}

/// Lowercases, maps underscores to spaces and collapses whitespace.
pub fn normalize_lemma(lemma: &str) -> Result<String> {
    let n = text::normalize(lemma).text;
    if n.is_empty() {
        return Err(Error::EmptyLemma(lemma.to_string()));
    }
    Ok(n)
}

/// Ordered, immutable set of synsets with a wnid index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    synsets: Vec<Synset>,
    index: HashMap<String, usize>,
}

impl Taxonomy {
    pub fn new(synsets: Vec<Synset>) -> Result<Self> {
        let mut index = HashMap::with_capacity(synsets.len());
        for (pos, s) in synsets.iter().enumerate() {
            s.validate()?;
            if index.insert(s.wnid.clone(), pos).is_some() {
                return Err(Error::DuplicateWnid {
                    path: Default::default(),
                    line: pos + 1,
                    wnid: s.wnid.clone(),
                });
            }
        }
        Ok(Taxonomy { synsets, index })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut synsets = Vec::new();
        let mut index = HashMap::new();
        jsonl::for_each_line(path, |line, s: Synset| {
            s.validate().map_err(|e| Error::Parse {
                path: path.into(),
                line,
                message: e.to_string(),
            })?;
            if index.insert(s.wnid.clone(), synsets.len()).is_some() {
                return Err(Error::DuplicateWnid {
                    path: path.into(),
                    line,
                    wnid: s.wnid,
                });
            }
            synsets.push(s);
            Ok(())
        })?;
        Ok(Taxonomy { synsets, index })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_file(path, &self.synsets)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Synset> {
        self.synsets.iter()
    }

    pub fn get(&self, wnid: &str) -> Option<&Synset> {
        self.index.get(wnid).map(|&i| &self.synsets[i])
    }

    pub fn position(&self, wnid: &str) -> Option<usize> {
        self.index.get(wnid).copied()
    }
}

impl<'a> IntoIterator for &'a Taxonomy {
    type Item = &'a Synset;
    type IntoIter = std::slice::Iter<'a, Synset>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}
