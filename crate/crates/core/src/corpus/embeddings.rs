//! Binary embedding matrix format.
//!
//! ```text
//! offset  size          field
//! 0       4             magic "EMB1"
//! 4       4             dim   (u32, little-endian)
//! 8       8             count (u64, little-endian)
//! 16      count*dim*4   rows, f32 little-endian, row-major
//! ...                   id trailer: one JSON string per line, LF-terminated,
//!                       in row order
//! ```
//!
//! Vectors are stored as produced by the encoder, unnormalized.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const EMBEDDING_MAGIC: [u8; 4] = *b"EMB1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from row-major `data`. Rejects duplicate ids, zero
    /// rows and non-finite values.
    pub fn new(dim: usize, ids: Vec<String>, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("embedding dim must be positive".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::SizeMismatch(format!(
                "{} ids x dim {} needs {} values, got {}",
                ids.len(),
                dim,
                ids.len() * dim,
                data.len()
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        let mut norms = Vec::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            let row = &data[i * dim..(i + 1) * dim];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(id.clone()));
            }
            let sq: f64 = row.iter().map(|&v| v as f64 * v as f64).sum();
            if sq == 0.0 {
                return Err(Error::ZeroVector(id.clone()));
            }
            norms.push(sq.sqrt());
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    path: Default::default(),
                    line: i + 1,
                    id: id.clone(),
                });
            }
        }
        Ok(EmbeddingMatrix {
            dim,
            ids,
            data,
            norms,
            index,
        })
    }

    pub fn from_rows<S: Into<String>>(
        rows: impl IntoIterator<Item = (S, Vec<f32>)>,
    ) -> Result<Self> {
        let mut ids = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (id, row) in rows {
            let d = *dim.get_or_insert(row.len());
            if row.len() != d {
                return Err(Error::DimMismatch {
                    left: d,
                    right: row.len(),
                });
            }
            ids.push(id.into());
            data.extend(row);
        }
        Self::new(dim.unwrap_or(1), ids, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Euclidean norm of row `i`, computed in f64 at construction.
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Result<&[f32]> {
        self.position(id)
            .map(|i| self.row(i))
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = (&str, &[f32])> + '_ {
        self.ids
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(id, row)| (id.as_str(), row))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4 + self.ids.len() * 16);
        out.extend_from_slice(&EMBEDDING_MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for id in &self.ids {
            serde_json::to_writer(&mut out, id).expect("string serialization");
            out.push(b'\n');
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::SizeMismatch(format!(
                "file of {} bytes has no header",
                bytes.len()
            )));
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != EMBEDDING_MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::SizeMismatch(format!(
                "header needs {HEADER_LEN} bytes, file has {}",
                bytes.len()
            )));
        }
        let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        if dim == 0 {
            return Err(Error::Invalid("embedding dim must be positive".into()));
        }
        let payload_len = usize::try_from(count)
            .ok()
            .and_then(|c| c.checked_mul(dim))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::SizeMismatch(format!("count {count} x dim {dim} overflows")))?;
        let payload_end = HEADER_LEN
            .checked_add(payload_len)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                Error::SizeMismatch(format!(
                    "header declares {count} x {dim} floats ({payload_len} bytes), file holds {}",
                    bytes.len() - HEADER_LEN
                ))
            })?;
        let count = count as usize;

        let data: Vec<f32> = bytes[HEADER_LEN..payload_end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();

        let ids = parse_trailer(&bytes[payload_end..], count)?;
        Self::new(dim, ids, data)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// The trailer must hold exactly `count` LF-terminated JSON strings. Any
/// disagreement means the payload length and the header disagree.
fn parse_trailer(trailer: &[u8], count: usize) -> Result<Vec<String>> {
    let mismatch = |what: String| Error::SizeMismatch(format!("id trailer: {what}"));
    if count == 0 {
        return if trailer.is_empty() {
            Ok(Vec::new())
        } else {
            Err(mismatch(format!(
                "{} trailing bytes after empty matrix",
                trailer.len()
            )))
        };
    }
    if trailer.last() != Some(&b'\n') {
        return Err(mismatch("missing final newline".into()));
    }
    let lines: Vec<&[u8]> = trailer[..trailer.len() - 1]
        .split(|&b| b == b'\n')
        .collect();
    if lines.len() != count {
        return Err(mismatch(format!(
            "expected {count} ids, found {} lines",
            lines.len()
        )));
    }
    lines
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_slice::<String>(line)
                .map_err(|e| mismatch(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(dim: u32, count: u64, floats: &[f32], ids: &[&str]) -> Vec<u8> {
        let mut b = b"EMB1".to_vec();
        b.extend(dim.to_le_bytes());
        b.extend(count.to_le_bytes());
        for f in floats {
            b.extend(f.to_le_bytes());
        }
        for id in ids {
            b.extend(format!("\"{id}\"\n").bytes());
        }
        b
    }

    #[test]
    fn two_by_four() {
        let floats: Vec<f32> = (1..=8).map(|v| v as f32).collect();
        let bytes = raw(4, 2, &floats, &["a", "b"]);
        assert_eq!(bytes.len(), 16 + 32 + 8);
        let m = EmbeddingMatrix::from_bytes(&bytes).unwrap();
        assert_eq!((m.count(), m.dim()), (2, 4));
        assert_eq!(m.get("b").unwrap(), &[5.0, 6.0, 7.0, 8.0]);
        assert!(matches!(m.get("c"), Err(Error::UnknownId(_))));
        assert_eq!(m.to_bytes(), bytes);
    }

    #[test]
    fn truncated_payload_is_size_mismatch() {
        let floats: Vec<f32> = (1..=7).map(|v| v as f32).collect();
        let bytes = raw(4, 2, &floats, &["a", "b"]);
        assert!(matches!(
            EmbeddingMatrix::from_bytes(&bytes),
            Err(Error::SizeMismatch(_))
        ));

        let floats: Vec<f32> = (1..=8).map(|v| v as f32).collect();
        let full = raw(4, 2, &floats, &["a", "b"]);
        let cut = &full[..16 + 28];
        assert!(matches!(
            EmbeddingMatrix::from_bytes(cut),
            Err(Error::SizeMismatch(_))
        ));
        assert!(matches!(
            EmbeddingMatrix::from_bytes(&full[..10]),
            Err(Error::SizeMismatch(_))
        ));
    }

    #[test]
    fn bad_magic() {
        let mut bytes = raw(1, 1, &[1.0], &["a"]);
        bytes[3] = b'2';
        assert!(
            matches!(EmbeddingMatrix::from_bytes(&bytes), Err(Error::BadMagic(m)) if &m == b"EMB2")
        );
    }

    #[test]
    fn zero_row_names_id() {
        let bytes = raw(2, 2, &[1.0, 0.0, 0.0, 0.0], &["a", "b"]);
        assert!(
            matches!(EmbeddingMatrix::from_bytes(&bytes), Err(Error::ZeroVector(id)) if id == "b")
        );
    }

    #[test]
    fn duplicate_ids_rejected() {
        let bytes = raw(1, 2, &[1.0, 2.0], &["a", "a"]);
        assert!(matches!(
            EmbeddingMatrix::from_bytes(&bytes),
            Err(Error::DuplicateId { .. })
        ));
    }

    #[test]
    fn empty_matrix_round_trips() {
        let bytes = raw(3, 0, &[], &[]);
        let m = EmbeddingMatrix::from_bytes(&bytes).unwrap();
        assert!(m.is_empty());
        assert_eq!(m.to_bytes(), bytes);
    }

    #[test]
    fn file_round_trip() {
        let m = EmbeddingMatrix::from_rows([
            ("x\"q", vec![0.5f32, -1e-30]),
            ("y", vec![f32::MAX, 1.0]),
        ])
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        m.save(f.path()).unwrap();
        let back = EmbeddingMatrix::load(f.path()).unwrap();
        assert_eq!(
            back.get("x\"q").unwrap()[1].to_bits(),
            (-1e-30f32).to_bits()
        );
        assert_eq!(std::fs::read(f.path()).unwrap(), back.to_bytes());
    }

    proptest! {
        #[test]
        fn bitwise_round_trip(
            dim in 1usize..6,
            rows in prop::collection::vec(prop::collection::vec(any::<u32>(), 6), 0..8),
        ) {
            // arbitrary finite bit patterns, first component forced nonzero
            let rows: Vec<(String, Vec<f32>)> = rows
                .into_iter()
                .enumerate()
                .map(|(i, bits)| {
                    let mut v: Vec<f32> = bits[..dim].iter().map(|&b| {
                        let f = f32::from_bits(b);
                        if f.is_finite() { f } else { 0.25 }
                    }).collect();
                    v[0] = 1.0 + i as f32;
                    (format!("id-{i}"), v)
                })
                .collect();
            let m = EmbeddingMatrix::new(
                dim,
                rows.iter().map(|r| r.0.clone()).collect(),
                rows.iter().flat_map(|r| r.1.clone()).collect(),
            ).unwrap();
            let bytes = m.to_bytes();
            let back = EmbeddingMatrix::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            for (id, row) in &rows {
                let got = back.get(id).unwrap();
                prop_assert!(got.iter().zip(row).all(|(a, b)| a.to_bits() == b.to_bits()));
            }
            prop_assert!(back.get("absent").is_err());
        }
    }
}
