//! Mapping remote references to the worker that owns them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::StoreError;
use crate::ids::{PartitionId, SubgraphId, VertexId};
use crate::model::RemoteRef;

/// Where a partition's worker can be reached.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// Index of an in-process mailbox.
    Mailbox(usize),
    /// `host:port` of a socket worker.
    Socket(String),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Mailbox(i) => write!(f, "mailbox:{i}"),
            Endpoint::Socket(addr) => f.write_str(addr),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterView {
    endpoints: BTreeMap<PartitionId, Endpoint>,
}

impl ClusterView {
    /// Partition `i` served by mailbox `i`.
    pub fn in_memory(k: usize) -> Self {
        ClusterView {
            endpoints: (0..k as u32).map(|i| (PartitionId(i), Endpoint::Mailbox(i as usize))).collect(),
        }
    }

    /// Partition `i` served by `addresses[i]`.
    pub fn sockets<S: Into<String>>(addresses: impl IntoIterator<Item = S>) -> Self {
        ClusterView {
            endpoints: addresses
                .into_iter()
                .enumerate()
                .map(|(i, a)| (PartitionId(i as u32), Endpoint::Socket(a.into())))
                .collect(),
        }
    }

    pub fn insert(&mut self, p: PartitionId, endpoint: Endpoint) {
        self.endpoints.insert(p, endpoint);
    }

    pub fn endpoint(&self, p: PartitionId) -> Result<&Endpoint, StoreError> {
        self.endpoints.get(&p).ok_or(StoreError::Unmapped(p))
    }

    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub endpoint: Endpoint,
    pub subgraph: SubgraphId,
    pub vertex: VertexId,
}

pub fn resolve_remote(r: &RemoteRef, view: &ClusterView) -> Result<Resolved, StoreError> {
    Ok(Resolved {
        endpoint: view.endpoint(r.partition)?.clone(),
        subgraph: r.subgraph,
        vertex: r.vertex,
    })
}
