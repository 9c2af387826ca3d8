use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate wnid {wnid}")]
    DuplicateWnid {
        path: PathBuf,
        line: usize,
        wnid: String,
    },

    #[error("{path}:{line}: duplicate id {id}")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("invalid wnid {0:?}: expected 'n' followed by 8 digits")]
    InvalidWnid(String),

    #[error("empty lemma in synset {0}")]
    EmptyLemma(String),

    #[error("bad magic: expected EMB1, found {0:?}")]
    BadMagic([u8; 4]),

    #[error("embedding size mismatch: {0}")]
    SizeMismatch(String),

    #[error("zero vector for id {0}")]
    ZeroVector(String),

    #[error("non-finite value in vector for id {0}")]
    NonFinite(String),

    #[error("unknown id {0}")]
    UnknownId(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("missing embedding for {0}")]
    MissingEmbedding(String),

    #[error("missing instance {0} in corpus")]
    MissingInstance(String),

    #[error("missing prediction for {0}")]
    MissingPrediction(String),

    #[error("missing weight for class {0}")]
    MissingWeight(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("constant input: rank correlation undefined")]
    ConstantInput,

    #[error("insufficient survivors: {rule} kept {kept}, need at least {need}")]
    InsufficientSurvivors {
        rule: &'static str,
        kept: usize,
        need: usize,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
