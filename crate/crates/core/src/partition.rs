//! k-way vertex partitioning, sub-graph discovery and meta-graph diagnostics.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::attr::{AttrScope, AttributeColumn};
use crate::error::{ModelError, PartitionError};
use crate::graph::{Graph, GraphBuilder};
use crate::ids::{PartitionId, SubgraphId, VertexId};
use crate::model::{Partition, RemoteRef, Subgraph, VertexAdjacency};

pub const DEFAULT_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Deterministic hash of the vertex id.
    Hash,
    /// BFS-grown regions seeded round-robin from high-degree vertices.
    BalancedGreedy { slack: f64 },
    /// `vertex_id<TAB>partition_id` lines read from a file.
    Imported(PathBuf),
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::BalancedGreedy { slack: DEFAULT_SLACK }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionMap {
    k: usize,
    assignment: Vec<PartitionId>,
    edge_cut: usize,
    sizes: Vec<usize>,
    warnings: Vec<String>,
}

impl PartitionMap {
    /// Wraps an explicit assignment and computes its statistics.
    pub fn from_assignment(graph: &Graph, k: usize, assignment: Vec<PartitionId>) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::ZeroPartitions);
        }
        assert_eq!(assignment.len(), graph.num_vertices(), "assignment covers every vertex");
        let mut sizes = vec![0usize; k];
        for p in &assignment {
            sizes[p.index()] += 1;
        }
        let mut edge_cut = 0;
        for u in graph.vertices() {
            for &v in graph.out_neighbors(u) {
                if assignment[u.index()] != assignment[v.index()] && (graph.is_directed() || u < v) {
                    edge_cut += 1;
                }
            }
        }
        let warnings = sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(p, _)| format!("partition {p} is empty"))
            .collect();
        Ok(PartitionMap {
            k,
            assignment,
            edge_cut,
            sizes,
            warnings,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn partition_of(&self, v: VertexId) -> PartitionId {
        self.assignment[v.index()]
    }

    pub fn assignment(&self) -> &[PartitionId] {
        &self.assignment
    }

    pub fn edge_cut(&self) -> usize {
        self.edge_cut
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Empty-partition notices; these are not errors.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Renders the map in the `vertex_id<TAB>partition_id` text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("# k={}\n", self.k);
        for (v, p) in self.assignment.iter().enumerate() {
            let _ = writeln!(s, "{v}\t{}", p.0);
        }
        s
    }

    /// Parses the text format against `graph`; every vertex must appear once.
    pub fn parse(graph: &Graph, k: usize, text: &str) -> Result<Self, PartitionError> {
        let n = graph.num_vertices();
        let mut assignment: Vec<Option<PartitionId>> = vec![None; n];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| PartitionError::Malformed { line: line_no, reason };
            let mut fields = line.split_whitespace();
            let (Some(v), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(malformed(format!("expected `vertex_id<TAB>partition_id`, got `{line}`")));
            };
            let v: u64 = v.parse().map_err(|_| malformed(format!("bad vertex id `{v}`")))?;
            let p: u32 = p.parse().map_err(|_| malformed(format!("bad partition id `{p}`")))?;
            if v as usize >= n {
                return Err(malformed(format!("vertex {v} not in graph of {n} vertices")));
            }
            if p as usize >= k {
                return Err(malformed(format!("partition {p} outside [0, {k})")));
            }
            if assignment[v as usize].replace(PartitionId(p)).is_some() {
                return Err(malformed(format!("vertex {v} assigned twice")));
            }
        }
        let assignment = assignment
            .into_iter()
            .enumerate()
            .map(|(v, p)| p.ok_or(PartitionError::Unassigned(VertexId(v as u64))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_assignment(graph, k, assignment)
    }
}

/// Assigns every vertex of `graph` to one of `k` partitions.
pub fn partition_graph(graph: &Graph, k: usize, strategy: &Strategy) -> Result<PartitionMap, PartitionError> {
    let n = graph.num_vertices();
    if k == 0 {
        return Err(PartitionError::ZeroPartitions);
    }
    if n == 0 {
        return Err(PartitionError::EmptyGraph);
    }
    if k > n {
        return Err(PartitionError::TooManyPartitions { k, vertices: n });
    }
    let assignment = match strategy {
        Strategy::Hash => graph
            .vertices()
            .map(|v| PartitionId((splitmix64(v.0) % k as u64) as u32))
            .collect(),
        Strategy::BalancedGreedy { slack } => balanced_greedy(graph, k, *slack),
        Strategy::Imported(path) => {
            let text = std::fs::read_to_string(path)?;
            return PartitionMap::parse(graph, k, &text);
        }
    };
    PartitionMap::from_assignment(graph, k, assignment)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Cap on partition size used by the balanced-greedy strategy.
pub fn balanced_cap(n: usize, k: usize, slack: f64) -> usize {
    let base = n.div_ceil(k);
    base + (base as f64 * slack.max(0.0)).floor() as usize
}

fn balanced_greedy(graph: &Graph, k: usize, slack: f64) -> Vec<PartitionId> {
    let n = graph.num_vertices();
    let adj = graph.undirected_adjacency();
    let cap = balanced_cap(n, k, slack);

    // seed order: degree descending, id ascending
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
    let mut seed_cursor = 0;

    let mut assignment: Vec<Option<PartitionId>> = vec![None; n];
    let mut sizes = vec![0usize; k];
    let mut frontiers: Vec<VecDeque<usize>> = vec![VecDeque::new(); k];
    let mut assigned = 0;

    while assigned < n {
        let mut progressed = false;
        for p in 0..k {
            if assigned == n {
                break;
            }
            if sizes[p] >= cap {
                continue;
            }
            let next = loop {
                match frontiers[p].pop_front() {
                    Some(v) if assignment[v].is_none() => break Some(v),
                    Some(_) => continue,
                    None => break None,
                }
            };
            let v = match next {
                Some(v) => v,
                None => {
                    while seed_cursor < n && assignment[by_degree[seed_cursor]].is_some() {
                        seed_cursor += 1;
                    }
                    by_degree[seed_cursor]
                }
            };
            assignment[v] = Some(PartitionId(p as u32));
            sizes[p] += 1;
            assigned += 1;
            progressed = true;
            for &w in &adj[v] {
                if assignment[w.index()].is_none() {
                    frontiers[p].push_back(w.index());
                }
            }
        }
        assert!(progressed, "capacity {cap} x {k} covers {n} vertices");
    }
    assignment.into_iter().map(|p| p.expect("all assigned")).collect()
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Weakly connected components of `vertices` under `edges` (both endpoints
/// local), each sorted, ordered by smallest member.
fn local_components(
    vertices: &[VertexId],
    edges: impl Iterator<Item = (VertexId, VertexId)>,
) -> Vec<Vec<VertexId>> {
    let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut dsu = DisjointSet::new(vertices.len());
    for (u, v) in edges {
        if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
            dsu.union(a, b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        groups.entry(dsu.find(i)).or_default().push(v);
    }
    let mut comps: Vec<Vec<VertexId>> = groups.into_values().collect();
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Re-discovers the sub-graphs of a partition from the union of its current
/// sub-graphs' local edges. Ids are reassigned in order of smallest vertex;
/// remote edges stay attached to their source vertex. Attributes are not
/// carried over.
pub fn discover_subgraphs(partition: &Partition) -> Vec<Subgraph> {
    let vertices = partition.vertices();
    let edges: Vec<(VertexId, VertexId)> = partition.subgraphs.iter().flat_map(|s| s.local_edges()).collect();
    let directed = partition.subgraphs.first().is_some_and(Subgraph::is_directed);
    let mut adjacency: HashMap<VertexId, VertexAdjacency> = vertices
        .iter()
        .map(|&v| {
            (
                v,
                VertexAdjacency {
                    vertex: v,
                    ..Default::default()
                },
            )
        })
        .collect();
    for &(u, v) in &edges {
        if adjacency.contains_key(&v) {
            adjacency.get_mut(&u).expect("local source").local.push(v);
        }
    }
    for sg in &partition.subgraphs {
        for (u, r) in sg.remote_edges() {
            adjacency.get_mut(&u).expect("local source").remote.push(*r);
        }
    }
    local_components(&vertices, edges.into_iter())
        .into_iter()
        .enumerate()
        .map(|(i, comp)| {
            let adj = comp.iter().map(|v| adjacency.remove(v).expect("vertex once")).collect();
            Subgraph::new(SubgraphId::new(partition.id, i as u32), directed, adj)
        })
        .collect()
}

/// Materialises all `k` partitions of `graph` under `map`: discovers each
/// partition's sub-graphs, resolves remote edges to (partition, sub-graph,
/// vertex) and slices every graph attribute onto the sub-graphs.
pub fn build_partitions(graph: &Graph, map: &PartitionMap) -> Vec<Partition> {
    let k = map.k();
    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); k];
    for v in graph.vertices() {
        members[map.partition_of(v).index()].push(v);
    }
    let mut components: Vec<Vec<Vec<VertexId>>> = Vec::with_capacity(k);
    for verts in &members {
        let local_edges = verts.iter().flat_map(|&u| {
            graph
                .out_neighbors(u)
                .iter()
                .filter(move |&&v| map.partition_of(v) == map.partition_of(u))
                .map(move |&v| (u, v))
        });
        components.push(local_components(verts, local_edges));
    }
    assemble_partitions(graph, components)
}

/// Builds partitions from explicit vertex groups: `groups[p]` lists the
/// sub-graphs of partition `p`, each a sorted vertex list. Edges between
/// vertices of the same group are local; all others are remote.
pub(crate) fn assemble_partitions(graph: &Graph, groups: Vec<Vec<Vec<VertexId>>>) -> Vec<Partition> {
    let mut owner: Vec<SubgraphId> = vec![SubgraphId(u64::MAX); graph.num_vertices()];
    for (p, comps) in groups.iter().enumerate() {
        for (i, comp) in comps.iter().enumerate() {
            let id = SubgraphId::new(PartitionId(p as u32), i as u32);
            for v in comp {
                owner[v.index()] = id;
            }
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(p, comps)| {
            let pid = PartitionId(p as u32);
            let subgraphs = comps
                .into_iter()
                .enumerate()
                .map(|(i, comp)| build_subgraph(graph, &owner, SubgraphId::new(pid, i as u32), &comp))
                .collect();
            Partition::new(pid, subgraphs)
        })
        .collect()
}

fn build_subgraph(
    graph: &Graph,
    owner: &[SubgraphId],
    id: SubgraphId,
    comp: &[VertexId],
) -> Subgraph {
    let mut local_arcs = Vec::new();
    let mut remote_arcs = Vec::new();
    let adjacency = comp
        .iter()
        .map(|&u| {
            let mut a = VertexAdjacency {
                vertex: u,
                ..Default::default()
            };
            let mut remote = Vec::new();
            for arc in graph.edge_range(u) {
                let v = graph.out_neighbors(u)[arc - graph.edge_range(u).start];
                if owner[v.index()] == id {
                    a.local.push(v);
                    local_arcs.push(arc);
                } else {
                    remote.push((RemoteRef::new(owner[v.index()], v), arc));
                }
            }
            // out-neighbors are already sorted by vertex id
            a.remote = remote.iter().map(|r| r.0).collect();
            remote_arcs.extend(remote.into_iter().map(|r| r.1));
            a
        })
        .collect();
    let mut sg = Subgraph::new(id, graph.is_directed(), adjacency);

    for col in graph.vertex_attrs() {
        let values = comp.iter().map(|v| col.values()[v.index()].clone()).collect();
        let column = AttributeColumn::new(col.def().clone(), values).expect("typed source column");
        sg.set_attribute(column).expect("vertex column sized to sub-graph");
    }
    for col in graph.edge_attrs() {
        debug_assert_eq!(col.def().scope, AttrScope::Edge);
        let values = local_arcs
            .iter()
            .chain(remote_arcs.iter())
            .map(|&arc| col.values()[arc].clone())
            .collect();
        let column = AttributeColumn::new(col.def().clone(), values).expect("typed source column");
        sg.set_attribute(column).expect("edge column sized to sub-graph");
    }
    sg
}

/// Sub-graphs as meta-vertices, joined wherever a remote edge connects them
/// (in either direction).
#[derive(Debug, Clone)]
pub struct MetaGraph {
    adjacency: BTreeMap<SubgraphId, BTreeSet<SubgraphId>>,
    /// Dense copy of `adjacency`: positions into `ids`.
    ids: Vec<SubgraphId>,
    dense: Vec<Vec<u32>>,
    components: Vec<Vec<SubgraphId>>,
    diameters: OnceLock<Vec<usize>>,
}

/// Breadth-first hop counts from `source` into `dist`, returning the
/// visit order. Unreached entries stay `u32::MAX`.
fn bfs(dense: &[Vec<u32>], source: usize, dist: &mut [u32], order: &mut Vec<u32>) {
    order.clear();
    dist[source] = 0;
    order.push(source as u32);
    let mut head = 0;
    while head < order.len() {
        let u = order[head] as usize;
        head += 1;
        for &w in &dense[u] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[u] + 1;
                order.push(w);
            }
        }
    }
}

impl MetaGraph {
    pub fn vertices(&self) -> impl Iterator<Item = SubgraphId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, sg: SubgraphId) -> impl Iterator<Item = SubgraphId> + '_ {
        self.adjacency.get(&sg).into_iter().flatten().copied()
    }

    pub fn has_edge(&self, a: SubgraphId, b: SubgraphId) -> bool {
        self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Weakly connected meta-components, each sorted, ordered by first member.
    pub fn components(&self) -> &[Vec<SubgraphId>] {
        &self.components
    }

    /// Diameter of each entry of [`Self::components`], computed on first use.
    pub fn component_diameters(&self) -> &[usize] {
        self.diameters.get_or_init(|| {
            let n = self.ids.len();
            let ecc: Vec<u32> = (0..n)
                .into_par_iter()
                .map_init(
                    || (vec![u32::MAX; n], Vec::new()),
                    |(dist, order), s| {
                        bfs(&self.dense, s, dist, order);
                        let far = order.last().map_or(0, |&v| dist[v as usize]);
                        for &v in order.iter() {
                            dist[v as usize] = u32::MAX;
                        }
                        far
                    },
                )
                .collect();
            self.components
                .iter()
                .map(|comp| comp.iter().map(|c| ecc[self.position(*c)] as usize).max().unwrap_or(0))
                .collect()
        })
    }

    fn position(&self, sg: SubgraphId) -> usize {
        self.ids.binary_search(&sg).expect("meta-vertex")
    }

    /// Diameter of the largest meta-component (ties: the larger diameter).
    pub fn diameter(&self) -> usize {
        self.components
            .iter()
            .zip(self.component_diameters())
            .max_by_key(|(c, &d)| (c.len(), d))
            .map_or(0, |(_, &d)| d)
    }

    /// Hop distances from `source` to every reachable meta-vertex.
    pub fn distances_from(&self, source: SubgraphId) -> HashMap<SubgraphId, usize> {
        let Ok(s) = self.ids.binary_search(&source) else {
            return HashMap::from([(source, 0)]);
        };
        let mut dist = vec![u32::MAX; self.ids.len()];
        let mut order = Vec::new();
        bfs(&self.dense, s, &mut dist, &mut order);
        order
            .iter()
            .map(|&v| (self.ids[v as usize], dist[v as usize] as usize))
            .collect()
    }

    pub fn eccentricity(&self, source: SubgraphId) -> usize {
        self.distances_from(source).into_values().max().unwrap_or(0)
    }
}

pub fn build_meta_graph(partitions: &[Partition]) -> MetaGraph {
    let mut adjacency: BTreeMap<SubgraphId, BTreeSet<SubgraphId>> = BTreeMap::new();
    for p in partitions {
        for sg in &p.subgraphs {
            adjacency.entry(sg.id()).or_default();
            for &t in sg.subgraph_neighbors() {
                adjacency.entry(sg.id()).or_default().insert(t);
                adjacency.entry(t).or_default().insert(sg.id());
            }
        }
    }
    let ids: Vec<SubgraphId> = adjacency.keys().copied().collect();
    let at = |s: &SubgraphId| ids.binary_search(s).expect("meta-vertex") as u32;
    let dense: Vec<Vec<u32>> = adjacency.values().map(|ns| ns.iter().map(at).collect()).collect();
    let mut components = Vec::new();
    let mut dist = vec![u32::MAX; ids.len()];
    let mut order = Vec::new();
    for s in 0..ids.len() {
        if dist[s] != u32::MAX {
            continue;
        }
        bfs(&dense, s, &mut dist, &mut order);
        let mut comp: Vec<SubgraphId> = order.iter().map(|&v| ids[v as usize]).collect();
        comp.sort_unstable();
        components.push(comp);
    }
    MetaGraph {
        adjacency,
        ids,
        dense,
        components,
        diameters: OnceLock::new(),
    }
}

/// Per-partition sub-graph count and size spread.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionSkew {
    pub partition: PartitionId,
    pub vertices: usize,
    pub subgraphs: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub mean_size: f64,
}

pub fn skew_report(partitions: &[Partition]) -> Vec<PartitionSkew> {
    partitions
        .iter()
        .map(|p| {
            let sizes: Vec<usize> = p.subgraphs.iter().map(Subgraph::num_vertices).collect();
            PartitionSkew {
                partition: p.id,
                vertices: p.num_vertices(),
                subgraphs: sizes.len(),
                min_size: sizes.iter().copied().min().unwrap_or(0),
                max_size: sizes.iter().copied().max().unwrap_or(0),
                mean_size: if sizes.is_empty() {
                    0.0
                } else {
                    sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
                },
            }
        })
        .collect()
}

/// Reassembles the whole graph from a complete set of partitions, with
/// every attribute column the sub-graphs carry. Vertex ids must be dense.
pub fn graph_from_partitions(partitions: &[Partition]) -> Result<Graph, PartitionError> {
    let n: usize = partitions.iter().map(Partition::num_vertices).sum();
    let directed = partitions
        .iter()
        .flat_map(|p| p.subgraphs.first())
        .any(Subgraph::is_directed);
    let sgs = || partitions.iter().flat_map(|p| &p.subgraphs);
    let mut builder = GraphBuilder::new(n, directed);
    for sg in sgs() {
        for (u, v) in sg.local_edges().chain(sg.remote_edges().map(|(u, r)| (u, r.vertex))) {
            if directed || u <= v {
                builder.add_edge(u.0, v.0);
            }
        }
    }
    let mut graph = builder.build()?.graph;

    let mut vertex_cols: BTreeMap<String, AttributeColumn> = BTreeMap::new();
    let mut edge_cols: BTreeMap<String, AttributeColumn> = BTreeMap::new();
    for sg in sgs() {
        for col in sg.attributes() {
            let def = col.def().clone();
            match def.scope {
                AttrScope::Vertex => {
                    let out = vertex_cols
                        .entry(def.name.clone())
                        .or_insert_with(|| AttributeColumn::nulls(def, n));
                    for (i, v) in sg.vertices().iter().enumerate() {
                        out.set(v.index(), col.get(i).cloned())?;
                    }
                }
                AttrScope::Edge => {
                    let out = edge_cols
                        .entry(def.name.clone())
                        .or_insert_with(|| AttributeColumn::nulls(def, graph.num_arcs()));
                    for (i, &u) in sg.vertices().iter().enumerate() {
                        let targets = sg
                            .local_edge_range(i)
                            .zip(sg.local_neighbors(i).iter().copied())
                            .chain(sg.remote_edge_range(i).zip(sg.remote_neighbors(i).iter().map(|r| r.vertex)));
                        for (slot, v) in targets {
                            let arc = graph.edge_range(u).start + arc_offset(&graph, u, v)?;
                            out.set(arc, col.get(slot).cloned())?;
                        }
                    }
                }
            }
        }
    }
    for col in vertex_cols.into_values() {
        graph.set_vertex_attr(col)?;
    }
    for col in edge_cols.into_values() {
        graph.set_edge_attr(col)?;
    }
    Ok(graph)
}

fn arc_offset(graph: &Graph, u: VertexId, v: VertexId) -> Result<usize, PartitionError> {
    graph
        .out_neighbors(u)
        .binary_search(&v)
        .map_err(|_| PartitionError::Model(ModelError::VertexOutOfRange(v.0, graph.num_vertices())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_from_edges;
    use crate::model::validate_cluster;

    fn cycle4() -> Graph {
        graph_from_edges(4, false, &[(0, 1), (1, 2), (2, 3), (3, 0)])
    }

    #[test]
    fn k1_puts_everything_in_partition_zero() {
        let g = cycle4();
        for strategy in [Strategy::Hash, Strategy::default()] {
            let m = partition_graph(&g, 1, &strategy).unwrap();
            assert!(m.assignment().iter().all(|&p| p == PartitionId(0)));
            assert_eq!(m.edge_cut(), 0);
        }
    }

    #[test]
    fn balanced_greedy_cycle_matches_best_balanced_split() {
        let g = cycle4();
        let m = partition_graph(&g, 2, &Strategy::default()).unwrap();
        assert_eq!(m.sizes(), &[2, 2]);
        // enumerate every balanced 2-way split
        let mut best = usize::MAX;
        for mask in 0u32..16 {
            if mask.count_ones() != 2 {
                continue;
            }
            let a: Vec<PartitionId> = (0..4).map(|i| PartitionId((mask >> i) & 1)).collect();
            best = best.min(PartitionMap::from_assignment(&g, 2, a).unwrap().edge_cut());
        }
        assert_eq!(best, 2);
        assert!(m.edge_cut() <= best);
    }

    #[test]
    fn too_many_partitions_rejected() {
        let g = cycle4();
        assert!(matches!(
            partition_graph(&g, 5, &Strategy::Hash),
            Err(PartitionError::TooManyPartitions { k: 5, vertices: 4 })
        ));
        assert!(matches!(partition_graph(&g, 0, &Strategy::Hash), Err(PartitionError::ZeroPartitions)));
    }

    #[test]
    fn hash_is_deterministic() {
        let g = graph_from_edges(50, false, &[]);
        let a = partition_graph(&g, 4, &Strategy::Hash).unwrap();
        let b = partition_graph(&g, 4, &Strategy::Hash).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn imported_map_round_trips() {
        let g = cycle4();
        let m = PartitionMap::from_assignment(&g, 3, vec![PartitionId(2), PartitionId(0), PartitionId(0), PartitionId(1)])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.tsv");
        std::fs::write(&path, m.to_text()).unwrap();
        let back = partition_graph(&g, 3, &Strategy::Imported(path)).unwrap();
        assert_eq!(back.assignment(), m.assignment());
    }

    #[test]
    fn malformed_import_reports_line() {
        let g = cycle4();
        let err = PartitionMap::parse(&g, 2, "# header\n0\t0\n1 zero\n").unwrap_err();
        assert!(matches!(err, PartitionError::Malformed { line: 3, .. }), "{err}");
        let err = PartitionMap::parse(&g, 2, "0\t0\n1\t1\n2\t0\n").unwrap_err();
        assert!(matches!(err, PartitionError::Unassigned(VertexId(3))));
        let err = PartitionMap::parse(&g, 2, "0\t0\n0\t1\n").unwrap_err();
        assert!(matches!(err, PartitionError::Malformed { line: 2, .. }));
    }

    #[test]
    fn empty_partition_is_a_warning() {
        let g = cycle4();
        let m = PartitionMap::from_assignment(&g, 2, vec![PartitionId(0); 4]).unwrap();
        assert_eq!(m.warnings().len(), 1);
        let parts = build_partitions(&g, &m);
        assert!(parts[1].is_empty());
    }

    #[test]
    fn one_component_one_subgraph() {
        let g = cycle4();
        let m = partition_graph(&g, 1, &Strategy::Hash).unwrap();
        let parts = build_partitions(&g, &m);
        assert_eq!(parts[0].subgraphs.len(), 1);
        assert_eq!(parts[0].subgraphs[0].num_vertices(), 4);
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let g = graph_from_edges(5, false, &[]);
        let m = partition_graph(&g, 1, &Strategy::Hash).unwrap();
        let parts = build_partitions(&g, &m);
        assert_eq!(parts[0].subgraphs.len(), 5);
        assert!(parts[0].subgraphs.iter().all(|s| s.num_vertices() == 1));
    }

    #[test]
    fn subgraph_ids_follow_smallest_vertex() {
        // partition 0 holds {0,1,4,5}: components {0,5} and {1,4}
        let g = graph_from_edges(6, false, &[(0, 5), (1, 4), (5, 2), (4, 3)]);
        let a = [0, 0, 1, 1, 0, 0].map(PartitionId).to_vec();
        let m = PartitionMap::from_assignment(&g, 2, a).unwrap();
        let parts = build_partitions(&g, &m);
        assert_eq!(parts[0].subgraphs[0].vertices(), &[VertexId(0), VertexId(5)]);
        assert_eq!(parts[0].subgraphs[1].vertices(), &[VertexId(1), VertexId(4)]);
        assert!(validate_cluster(&parts).is_empty());
    }

    #[test]
    fn meta_graph_chain_diameter() {
        // 4 sub-graphs in a chain across alternating partitions
        let g = graph_from_edges(8, false, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]);
        let a = [0, 0, 1, 1, 0, 0, 1, 1].map(PartitionId).to_vec();
        let m = PartitionMap::from_assignment(&g, 2, a).unwrap();
        let parts = build_partitions(&g, &m);
        let meta = build_meta_graph(&parts);
        assert_eq!(meta.num_vertices(), 4);
        assert_eq!(meta.diameter(), 3);
        let single = build_meta_graph(&build_partitions(&g, &partition_graph(&g, 1, &Strategy::Hash).unwrap()));
        assert_eq!(single.diameter(), 0);
    }

    #[test]
    fn rediscovery_merges_split_component() {
        use crate::model::{validate_partition, Subgraph, VertexAdjacency};
        let a = Subgraph::new(
            SubgraphId::new(PartitionId(0), 0),
            false,
            vec![VertexAdjacency {
                vertex: VertexId(0),
                local: vec![VertexId(1)],
                remote: vec![],
            }],
        );
        let b = Subgraph::new(
            SubgraphId::new(PartitionId(0), 1),
            false,
            vec![VertexAdjacency {
                vertex: VertexId(1),
                local: vec![VertexId(0)],
                remote: vec![],
            }],
        );
        let broken = Partition::new(PartitionId(0), vec![a, b]);
        assert!(!validate_partition(&broken).is_empty());
        let fixed = Partition::new(PartitionId(0), discover_subgraphs(&broken));
        assert_eq!(fixed.subgraphs.len(), 1);
        assert!(validate_partition(&fixed).is_empty());
    }
}
