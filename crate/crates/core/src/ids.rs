//! Dense integer identifiers for vertices, sub-graphs and partitions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Graph-wide vertex identifier, assigned densely at ingest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

/// Partition identifier in `[0, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartitionId(pub u32);

/// Graph-wide sub-graph identifier.
///
/// The owning partition lives in the upper 32 bits and the per-partition
/// index in the lower 32, so any `SubgraphId` maps to exactly one partition
/// without a lookup table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubgraphId(pub u64);

impl SubgraphId {
    pub fn new(partition: PartitionId, index: u32) -> Self {
        SubgraphId((u64::from(partition.0) << 32) | u64::from(index))
    }

    pub fn partition(self) -> PartitionId {
        PartitionId((self.0 >> 32) as u32)
    }

    /// Position of this sub-graph within its partition.
    pub fn index(self) -> u32 {
        self.0 as u32
    }
}

impl PartitionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for PartitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for SubgraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sg{}.{}", self.partition().0, self.index())
    }
}
