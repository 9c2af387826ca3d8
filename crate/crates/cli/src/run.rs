//! Input/output bookkeeping and the provenance record.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use textcurate_core::Error;

use crate::error::{config, CliResult};

pub const PROVENANCE_FILE: &str = "provenance.json";

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub struct Run {
    out: PathBuf,
    pub seed: u64,
    pub config_digest: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Run {
    pub fn new(out: PathBuf, seed: u64, config_digest: String) -> CliResult<Self> {
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Run {
            out,
            seed,
            config_digest,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Records an input, failing with a config error if it does not exist.
    pub fn input<'a>(&mut self, path: &'a Path) -> CliResult<&'a Path> {
        if !path.is_file() {
            return Err(config(format!("input {} does not exist", path.display())));
        }
        if !self.inputs.iter().any(|p| p == path) {
            self.inputs.push(path.to_path_buf());
        }
        Ok(path)
    }

    /// Path for an output file, recorded for the provenance.
    pub fn output(&mut self, name: &str) -> PathBuf {
        if !self.outputs.iter().any(|n| n == name) {
            self.outputs.push(name.to_string());
        }
        self.out.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let p = self.output(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("output serializes");
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Hashes all inputs and outputs into `provenance.json`. Output paths
    /// are relative to the output directory.
    pub fn finish(self, command: &str) -> CliResult<()> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| {
                Ok(FileDigest {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let outputs = self
            .outputs
            .iter()
            .map(|n| {
                Ok(FileDigest {
                    path: n.clone(),
                    sha256: sha256_file(&self.out.join(n))?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let prov = Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_digest: self.config_digest,
            seed: self.seed,
            inputs,
            outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&prov).expect("provenance serializes");
        bytes.push(b'\n');
        let p = self.out.join(PROVENANCE_FILE);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        Ok(())
    }
}
