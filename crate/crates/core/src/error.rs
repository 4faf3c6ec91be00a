use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Role;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{location}: cannot read {}: {source}", path.display())]
    DocumentText {
        location: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest at {location}: {message}")]
    Malformed { location: String, message: String },

    #[error("{location}: duplicate document id `{id}`")]
    DuplicateDocument { location: String, id: String },

    #[error("{location}: unknown document id `{id}`")]
    UnknownReference { location: String, id: String },

    #[error("{location}: document `{id}` has role {actual}, expected {expected}")]
    RoleMismatch {
        location: String,
        id: String,
        expected: Role,
        actual: Role,
    },

    #[error("{location}: duplicate edge {adversary} -> {target}")]
    DuplicateEdge {
        location: String,
        adversary: String,
        target: String,
    },

    #[error("{location}: edge count must be at least 1")]
    ZeroCount { location: String },

    #[error("n-gram order must be 1, 2 or 3 (got {0})")]
    NgramOrder(usize),

    #[error("at least 2 documents are required (got {0})")]
    TooFewDocuments(usize),

    #[error("every document produced an empty n-gram stream")]
    EmptyCorpus,

    #[error("document `{0}` is not in the matrix")]
    UnknownDocument(String),

    #[error("no {0} documents available")]
    EmptyRole(Role),

    #[error("no usable edges: every edge endpoint lacks a feature vector or the manifest has no edges")]
    NoUsableEdges,

    #[error("sample `{0}` is empty")]
    EmptySample(String),

    #[error("sample `{label}` has {n} values, at least {required} required")]
    DegenerateSample { label: String, n: usize, required: usize },

    #[error("rank {k} out of range 1..={max}")]
    RankOutOfRange { k: usize, max: usize },

    #[error("component {index} out of range (model has {k})")]
    ComponentOutOfRange { index: usize, k: usize },

    #[error("SVD did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self.root(), Error::NotConverged { .. })
    }
}
