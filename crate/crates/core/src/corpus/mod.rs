//! Caption records and embedding matrices.

mod embeddings;

pub use embeddings::{EmbeddingMatrix, EMBEDDING_MAGIC};

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// One image-text pair from the source corpus. Only the caption and the
/// ingested flags are kept; the image itself is represented elsewhere by
/// its embedding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub nsfw: bool,
    /// Whether the image contains rendered text naming its synset, as
    /// decided by an external OCR pass. `None` when unknown.
    #[serde(default)]
    pub text_in_image: Option<bool>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl InstanceRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        InstanceRecord {
            id: id.into(),
            text: text.into(),
            nsfw: false,
            text_in_image: None,
            meta: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<InstanceRecord>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(records: Vec<InstanceRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (pos, r) in records.iter().enumerate() {
            if index.insert(r.id.clone(), pos).is_some() {
                return Err(Error::DuplicateId {
                    path: Default::default(),
                    line: pos + 1,
                    id: r.id.clone(),
                });
            }
        }
        Ok(Corpus { records, index })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut records = Vec::new();
        let mut index = HashMap::new();
        jsonl::for_each_line(path, |line, r: InstanceRecord| {
            if index.insert(r.id.clone(), records.len()).is_some() {
                return Err(Error::DuplicateId {
                    path: path.into(),
                    line,
                    id: r.id,
                });
            }
            records.push(r);
            Ok(())
        })?;
        Ok(Corpus { records, index })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_file(path, &self.records)
    }

    pub fn records(&self) -> &[InstanceRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&InstanceRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
