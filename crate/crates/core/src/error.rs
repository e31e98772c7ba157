use std::path::PathBuf;

use thiserror::Error;

use crate::attr::AttrType;
use crate::ids::{PartitionId, SubgraphId, VertexId};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("vertex {0} is not local to sub-graph {1}")]
    UnknownVertex(VertexId, SubgraphId),
    #[error("attribute `{name}` expects {expected}, found {found} at position {position}")]
    AttributeType {
        name: String,
        expected: AttrType,
        found: AttrType,
        position: usize,
    },
    #[error("attribute `{name}` has {found} values, expected {expected}")]
    AttributeLength {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("vertex id {0} out of range for a graph of {1} vertices")]
    VertexOutOfRange(u64, usize),
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("cannot split {vertices} vertices into {k} partitions")]
    TooManyPartitions { k: usize, vertices: usize },
    #[error("partition count must be at least 1")]
    ZeroPartitions,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("partition map line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("partition map does not assign vertex {0}")]
    Unassigned(VertexId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store exists: {0}")]
    StoreExists(PathBuf),
    #[error("corrupt slice {file}: {reason}")]
    Corrupt { file: PathBuf, reason: String },
    #[error("sub-graph {0} not found in store")]
    NotFound(SubgraphId),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("configuration error: no endpoint for partition {0}")]
    Unmapped(PartitionId),
    #[error("invalid metadata {file}: {reason}")]
    Metadata { file: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("input has no vertices")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
}
