//! Line-oriented JSON helpers shared by every file format in the crate.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Streams `path` one JSON object per line, handing `(line_number, value)`
/// to `f`. Line numbers are 1-based. Blank lines are rejected.
pub fn for_each_line<T, F>(path: &Path, mut f: F) -> Result<()>
where
    T: DeserializeOwned,
    F: FnMut(usize, T) -> Result<()>,
{
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                message: "blank line".into(),
            });
        }
        let value: T = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.into(),
            line: lineno,
            message: e.to_string(),
        })?;
        f(lineno, value)?;
    }
    Ok(())
}

pub fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for_each_line(path, |_, v| {
        out.push(v);
        Ok(())
    })?;
    Ok(out)
}

/// Serializes each item on its own LF-terminated line.
pub fn to_writer<W: Write, T: Serialize>(
    mut w: W,
    items: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_file<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    to_writer(BufWriter::new(file), items).map_err(|e| Error::io(path, e))
}
