//! Partitions and sub-graphs.
//!
//! A sub-graph is a weakly connected set of local vertices inside one
//! partition, together with its local edges and the remote edges that leave
//! the partition. Topology is immutable once built; attribute columns may be
//! attached or replaced.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::attr::{AttrScope, AttributeColumn};
use crate::error::ModelError;
use crate::ids::{PartitionId, SubgraphId, VertexId};

/// Address of a vertex that lives in another partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RemoteRef {
    pub partition: PartitionId,
    pub subgraph: SubgraphId,
    pub vertex: VertexId,
}

impl RemoteRef {
    pub fn new(subgraph: SubgraphId, vertex: VertexId) -> Self {
        RemoteRef {
            partition: subgraph.partition(),
            subgraph,
            vertex,
        }
    }
}

impl fmt::Display for RemoteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.vertex, self.subgraph)
    }
}

/// One entry of [`Subgraph::neighbors`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Local(VertexId),
    Remote(RemoteRef),
}

/// Per-vertex adjacency handed to [`Subgraph::new`].
#[derive(Debug, Clone, Default)]
pub struct VertexAdjacency {
    pub vertex: VertexId,
    pub local: Vec<VertexId>,
    pub remote: Vec<RemoteRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    id: SubgraphId,
    directed: bool,
    vertices: Vec<VertexId>,
    local_offsets: Vec<usize>,
    local_targets: Vec<VertexId>,
    remote_offsets: Vec<usize>,
    remote_targets: Vec<RemoteRef>,
    neighbor_subgraphs: Vec<SubgraphId>,
    /// Remote arcs pointing *into* this sub-graph: (local target, remote source).
    in_remote: Option<Vec<(VertexId, RemoteRef)>>,
    attributes: BTreeMap<String, AttributeColumn>,
}

impl Subgraph {
    /// Builds a sub-graph, sorting vertices and neighbor lists into canonical
    /// order. Duplicate neighbor entries are collapsed. No semantic checks are
    /// made here; see [`validate_partition`].
    pub fn new(id: SubgraphId, directed: bool, mut adjacency: Vec<VertexAdjacency>) -> Self {
        adjacency.sort_by_key(|a| a.vertex);
        let mut vertices = Vec::with_capacity(adjacency.len());
        let mut local_offsets = vec![0];
        let mut local_targets = Vec::new();
        let mut remote_offsets = vec![0];
        let mut remote_targets = Vec::new();
        for mut a in adjacency {
            vertices.push(a.vertex);
            a.local.sort_unstable();
            a.local.dedup();
            local_targets.extend(a.local);
            local_offsets.push(local_targets.len());
            a.remote.sort_by_key(|r| (r.vertex, r.subgraph));
            a.remote.dedup();
            remote_targets.extend(a.remote);
            remote_offsets.push(remote_targets.len());
        }
        let neighbor_subgraphs = distinct_subgraphs(remote_targets.iter().map(|r| r.subgraph), id);
        Subgraph {
            id,
            directed,
            vertices,
            local_offsets,
            local_targets,
            remote_offsets,
            remote_targets,
            neighbor_subgraphs,
            in_remote: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> SubgraphId {
        self.id
    }

    pub fn partition(&self) -> PartitionId {
        self.id.partition()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Local vertices, ascending.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index_of(v).is_some()
    }

    /// Position of `v` in [`Self::vertices`].
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn local_neighbors(&self, idx: usize) -> &[VertexId] {
        &self.local_targets[self.local_offsets[idx]..self.local_offsets[idx + 1]]
    }

    pub fn remote_neighbors(&self, idx: usize) -> &[RemoteRef] {
        &self.remote_targets[self.remote_offsets[idx]..self.remote_offsets[idx + 1]]
    }

    /// Edge-attribute positions of the local out-edges of vertex `idx`.
    pub fn local_edge_range(&self, idx: usize) -> Range<usize> {
        self.local_offsets[idx]..self.local_offsets[idx + 1]
    }

    /// Edge-attribute positions of the remote out-edges of vertex `idx`.
    /// Remote edges follow all local edges in the edge order.
    pub fn remote_edge_range(&self, idx: usize) -> Range<usize> {
        let base = self.local_targets.len();
        base + self.remote_offsets[idx]..base + self.remote_offsets[idx + 1]
    }

    pub fn out_degree(&self, idx: usize) -> usize {
        self.local_edge_range(idx).len() + self.remote_offsets[idx + 1] - self.remote_offsets[idx]
    }

    pub fn num_local_arcs(&self) -> usize {
        self.local_targets.len()
    }

    pub fn num_remote_edges(&self) -> usize {
        self.remote_targets.len()
    }

    /// Local arcs plus remote edges; the length of edge-scoped columns.
    pub fn num_edge_slots(&self) -> usize {
        self.local_targets.len() + self.remote_targets.len()
    }

    pub fn remote_edges(&self) -> impl Iterator<Item = (VertexId, &RemoteRef)> + '_ {
        (0..self.vertices.len())
            .flat_map(move |i| self.remote_neighbors(i).iter().map(move |r| (self.vertices[i], r)))
    }

    pub fn local_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertices.len())
            .flat_map(move |i| self.local_neighbors(i).iter().map(move |&t| (self.vertices[i], t)))
    }

    /// All neighbors of `v`: local targets ascending, then remote targets
    /// ascending by vertex id.
    pub fn neighbors(&self, v: VertexId) -> Result<Vec<Neighbor>, ModelError> {
        let idx = self.index_of(v).ok_or(ModelError::UnknownVertex(v, self.id))?;
        Ok(self
            .local_neighbors(idx)
            .iter()
            .map(|&t| Neighbor::Local(t))
            .chain(self.remote_neighbors(idx).iter().map(|&r| Neighbor::Remote(r)))
            .collect())
    }

    /// Distinct sub-graphs reached by this sub-graph's remote edges, ascending.
    pub fn subgraph_neighbors(&self) -> &[SubgraphId] {
        &self.neighbor_subgraphs
    }

    /// Remote arcs entering this sub-graph, present once an in-edge index has
    /// been attached with [`attach_in_edge_index`].
    pub fn in_remote_edges(&self) -> Option<&[(VertexId, RemoteRef)]> {
        self.in_remote.as_deref()
    }

    /// Union of out- and in-neighbor sub-graphs, ascending.
    pub fn undirected_subgraph_neighbors(&self) -> Vec<SubgraphId> {
        match &self.in_remote {
            None => self.neighbor_subgraphs.clone(),
            Some(inn) => distinct_subgraphs(
                self.neighbor_subgraphs
                    .iter()
                    .copied()
                    .chain(inn.iter().map(|(_, r)| r.subgraph)),
                self.id,
            ),
        }
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeColumn> {
        self.attributes.get(name)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &AttributeColumn> {
        self.attributes.values()
    }

    /// Attaches an attribute column whose length matches the vertex or edge
    /// slot count for its scope.
    pub fn set_attribute(&mut self, column: AttributeColumn) -> Result<(), ModelError> {
        let expected = match column.def().scope {
            AttrScope::Vertex => self.num_vertices(),
            AttrScope::Edge => self.num_edge_slots(),
        };
        if column.len() != expected {
            return Err(ModelError::AttributeLength {
                name: column.name().to_string(),
                expected,
                found: column.len(),
            });
        }
        self.attributes.insert(column.name().to_string(), column);
        Ok(())
    }

    pub fn clear_attributes(&mut self) {
        self.attributes.clear();
    }

    pub(crate) fn set_in_remote(&mut self, mut edges: Vec<(VertexId, RemoteRef)>) {
        edges.sort();
        edges.dedup();
        self.in_remote = Some(edges);
    }

    /// Whether two sub-graphs have identical ids, vertices and adjacency.
    pub fn same_topology(&self, other: &Subgraph) -> bool {
        self.id == other.id
            && self.directed == other.directed
            && self.vertices == other.vertices
            && self.local_offsets == other.local_offsets
            && self.local_targets == other.local_targets
            && self.remote_offsets == other.remote_offsets
            && self.remote_targets == other.remote_targets
    }
}

fn distinct_subgraphs(ids: impl Iterator<Item = SubgraphId>, own: SubgraphId) -> Vec<SubgraphId> {
    let set: BTreeSet<SubgraphId> = ids.filter(|&s| s != own).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub id: PartitionId,
    pub subgraphs: Vec<Subgraph>,
}

impl Partition {
    pub fn new(id: PartitionId, mut subgraphs: Vec<Subgraph>) -> Self {
        subgraphs.sort_by_key(|s| s.id());
        Partition { id, subgraphs }
    }

    /// Partition vertex set, ascending.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self
            .subgraphs
            .iter()
            .flat_map(|s| s.vertices().iter().copied())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn num_vertices(&self) -> usize {
        self.subgraphs.iter().map(Subgraph::num_vertices).sum()
    }

    pub fn subgraph(&self, id: SubgraphId) -> Option<&Subgraph> {
        self.subgraphs
            .binary_search_by_key(&id, |s| s.id())
            .ok()
            .map(|i| &self.subgraphs[i])
    }

    pub fn is_empty(&self) -> bool {
        self.subgraphs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    WrongPartition,
    DuplicateVertex,
    Disconnected,
    MergeableSubgraphs,
    LocalTargetMissing,
    RemoteTargetLocal,
    DuplicateRemoteEdge,
    RemoteRefMismatch,
    DanglingRemote,
    DuplicatePartition,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::WrongPartition => "sub-graph id names another partition",
            ViolationKind::DuplicateVertex => "vertex in multiple sub-graphs",
            ViolationKind::Disconnected => "sub-graph not weakly connected",
            ViolationKind::MergeableSubgraphs => "mergeable sub-graphs",
            ViolationKind::LocalTargetMissing => "local edge target outside partition",
            ViolationKind::RemoteTargetLocal => "remote target is local",
            ViolationKind::DuplicateRemoteEdge => "duplicate remote edge",
            ViolationKind::RemoteRefMismatch => "remote reference partition/sub-graph mismatch",
            ViolationKind::DanglingRemote => "remote reference to missing vertex",
            ViolationKind::DuplicatePartition => "partition id repeated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subgraph: Option<SubgraphId>,
    pub vertex: Option<VertexId>,
    pub other: Option<SubgraphId>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(s) = self.subgraph {
            write!(f, " in {s}")?;
        }
        if let Some(v) = self.vertex {
            write!(f, " at {v}")?;
        }
        if let Some(o) = self.other {
            write!(f, " (with {o})")?;
        }
        Ok(())
    }
}

fn violation(kind: ViolationKind, sg: SubgraphId, v: Option<VertexId>, other: Option<SubgraphId>) -> Violation {
    Violation {
        kind,
        subgraph: Some(sg),
        vertex: v,
        other,
    }
}

/// Checks every partition- and sub-graph-local invariant, returning one
/// record per breach. An empty result means the partition is well formed.
pub fn validate_partition(p: &Partition) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut owner: HashMap<VertexId, SubgraphId> = HashMap::new();
    for sg in &p.subgraphs {
        if sg.partition() != p.id {
            out.push(violation(ViolationKind::WrongPartition, sg.id(), None, None));
        }
        for &v in sg.vertices() {
            if let Some(prev) = owner.insert(v, sg.id()) {
                out.push(violation(ViolationKind::DuplicateVertex, sg.id(), Some(v), Some(prev)));
            }
        }
    }
    let mut mergeable_seen = BTreeSet::new();
    for sg in &p.subgraphs {
        for (src, dst) in sg.local_edges() {
            if sg.contains(dst) {
                continue;
            }
            match owner.get(&dst) {
                Some(&other) => {
                    let pair = (sg.id().min(other), sg.id().max(other));
                    if mergeable_seen.insert(pair) {
                        out.push(violation(ViolationKind::MergeableSubgraphs, sg.id(), Some(src), Some(other)));
                    }
                }
                None => out.push(violation(ViolationKind::LocalTargetMissing, sg.id(), Some(dst), None)),
            }
        }
        for i in 0..sg.num_vertices() {
            let remotes = sg.remote_neighbors(i);
            for (j, r) in remotes.iter().enumerate() {
                if r.partition == p.id || owner.contains_key(&r.vertex) {
                    out.push(violation(ViolationKind::RemoteTargetLocal, sg.id(), Some(r.vertex), Some(r.subgraph)));
                }
                if remotes[..j].iter().any(|q| q.vertex == r.vertex) {
                    out.push(violation(ViolationKind::DuplicateRemoteEdge, sg.id(), Some(r.vertex), None));
                }
            }
        }
        if !is_weakly_connected(sg) {
            out.push(violation(ViolationKind::Disconnected, sg.id(), None, None));
        }
    }
    out
}

/// [`validate_partition`] on each partition plus the cross-partition checks:
/// unique partition ids, no vertex in two partitions, and every remote
/// reference resolving to a real vertex of the named sub-graph.
pub fn validate_cluster(partitions: &[Partition]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen_pids = BTreeSet::new();
    let mut owner: HashMap<VertexId, SubgraphId> = HashMap::new();
    let mut sgs: HashMap<SubgraphId, &Subgraph> = HashMap::new();
    for p in partitions {
        if !seen_pids.insert(p.id) {
            out.push(Violation {
                kind: ViolationKind::DuplicatePartition,
                subgraph: None,
                vertex: None,
                other: None,
            });
        }
        out.extend(validate_partition(p));
        for sg in &p.subgraphs {
            sgs.insert(sg.id(), sg);
            for &v in sg.vertices() {
                if let Some(prev) = owner.insert(v, sg.id()) {
                    if prev.partition() != sg.partition() {
                        out.push(violation(ViolationKind::DuplicateVertex, sg.id(), Some(v), Some(prev)));
                    }
                }
            }
        }
    }
    for p in partitions {
        for sg in &p.subgraphs {
            for (_, r) in sg.remote_edges() {
                if r.subgraph.partition() != r.partition {
                    out.push(violation(ViolationKind::RemoteRefMismatch, sg.id(), Some(r.vertex), Some(r.subgraph)));
                } else if !sgs.get(&r.subgraph).is_some_and(|t| t.contains(r.vertex)) {
                    out.push(violation(ViolationKind::DanglingRemote, sg.id(), Some(r.vertex), Some(r.subgraph)));
                }
            }
        }
    }
    out
}

fn is_weakly_connected(sg: &Subgraph) -> bool {
    let n = sg.num_vertices();
    if n <= 1 {
        return true;
    }
    let mut undirected = vec![Vec::new(); n];
    for i in 0..n {
        for &t in sg.local_neighbors(i) {
            if let Some(j) = sg.index_of(t) {
                undirected[i].push(j);
                undirected[j].push(i);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &j in &undirected[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Builds the remote in-edge index on every sub-graph. Needed by algorithms
/// that ignore edge direction on directed graphs.
pub fn attach_in_edge_index(partitions: &mut [Partition]) {
    let mut incoming: HashMap<SubgraphId, Vec<(VertexId, RemoteRef)>> = HashMap::new();
    for p in partitions.iter() {
        for sg in &p.subgraphs {
            for (src, r) in sg.remote_edges() {
                incoming
                    .entry(r.subgraph)
                    .or_default()
                    .push((r.vertex, RemoteRef::new(sg.id(), src)));
            }
        }
    }
    for p in partitions.iter_mut() {
        for sg in &mut p.subgraphs {
            let edges = incoming.remove(&sg.id()).unwrap_or_default();
            sg.set_in_remote(edges);
        }
    }
}
