//! Single-machine reference implementations over a whole [`Graph`].
//!
//! They share no code with the engine or the sub-graph algorithms, so
//! agreement between the two is meaningful.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use crate::attr::AttrValue;
use crate::graph::{Graph, VALUE_ATTR};
use crate::ids::{SubgraphId, VertexId};
use crate::model::Partition;
use crate::partition::build_meta_graph;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

fn weak_components(graph: &Graph) -> UnionFind {
    let mut uf = UnionFind::new(graph.num_vertices());
    for u in graph.vertices() {
        for v in graph.out_neighbors(u) {
            uf.union(u.index(), v.index());
        }
    }
    uf
}

/// Every vertex labelled with the largest id in its weakly connected
/// component.
pub fn cc_labels(graph: &Graph) -> Vec<(VertexId, u64)> {
    let mut uf = weak_components(graph);
    let n = graph.num_vertices();
    let mut best = vec![0u64; n];
    for v in 0..n {
        let r = uf.find(v);
        best[r] = best[r].max(v as u64);
    }
    (0..n).map(|v| (VertexId(v as u64), best[uf.find(v)])).collect()
}

/// Number of weakly connected components.
pub fn component_count(graph: &Graph) -> usize {
    let mut uf = weak_components(graph);
    (0..graph.num_vertices()).filter(|&v| uf.find(v) == v).count()
}

/// Max-vertex inputs: the `value` attribute (nulls as `-inf`) or the id.
pub fn vertex_values(graph: &Graph) -> Vec<f64> {
    match graph.vertex_attr(VALUE_ATTR) {
        Some(col) => col
            .values()
            .iter()
            .map(|v| v.as_ref().and_then(AttrValue::as_f64).unwrap_or(f64::NEG_INFINITY))
            .collect(),
        None => graph.vertices().map(|v| v.0 as f64).collect(),
    }
}

/// Linear scan: every vertex gets the maximum input of its weakly
/// connected component.
pub fn max_vertex(graph: &Graph) -> Vec<(VertexId, f64)> {
    let mut uf = weak_components(graph);
    let values = vertex_values(graph);
    let n = graph.num_vertices();
    let mut best = vec![f64::NEG_INFINITY; n];
    for (v, &x) in values.iter().enumerate() {
        let r = uf.find(v);
        best[r] = best[r].max(x);
    }
    (0..n).map(|v| (VertexId(v as u64), best[uf.find(v)])).collect()
}

/// Shortest distances along out-edges from `source`; `+inf` when
/// unreachable. Unit mode is a breadth-first search, weighted mode a
/// binary-heap Dijkstra over the `weight` edge attribute.
pub fn sssp(graph: &Graph, source: VertexId, weighted: bool) -> Vec<(VertexId, f64)> {
    let n = graph.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    if source.index() >= n {
        return graph.vertices().map(|v| (v, f64::INFINITY)).collect();
    }
    dist[source.index()] = 0.0;
    if weighted {
        // weights are non-negative, so their bit patterns order like the values
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, source.index())));
        let mut done = vec![false; n];
        while let Some(Reverse((bits, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            let d = f64::from_bits(bits);
            let uv = VertexId(u as u64);
            for arc in graph.edge_range(uv) {
                let v = graph.out_neighbors(uv)[arc - graph.edge_range(uv).start].index();
                let nd = d + graph.arc_weight(arc);
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd.to_bits(), v)));
                }
            }
        }
    } else {
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()];
            for &v in graph.out_neighbors(u) {
                if dist[v.index()].is_infinite() {
                    dist[v.index()] = d + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    graph.vertices().zip(dist).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub damping: f64,
    pub teleport: f64,
    pub redistribute_dangling: bool,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            damping: 0.85,
            teleport: 0.15,
            redistribute_dangling: true,
        }
    }
}

impl PowerIteration {
    /// One synchronous round. In-neighbor contributions and dangling mass
    /// are added in ascending source id order.
    pub fn step(&self, graph: &Graph, inn: &[Vec<VertexId>], rank: &[f64]) -> Vec<f64> {
        let n = rank.len() as f64;
        let dangling = if self.redistribute_dangling {
            graph
                .vertices()
                .filter(|&u| graph.out_degree(u) == 0)
                .fold(0.0, |acc, u| acc + rank[u.index()])
        } else {
            0.0
        };
        inn.iter()
            .map(|sources| {
                let sum = sources
                    .iter()
                    .fold(0.0, |acc, &u| acc + rank[u.index()] / graph.out_degree(u) as f64);
                self.teleport / n + self.damping * (sum + dangling / n)
            })
            .collect()
    }

    /// Ranks after exactly `rounds` rounds from the uniform vector.
    pub fn run(&self, graph: &Graph, rounds: usize) -> Vec<f64> {
        let inn = graph.in_adjacency();
        let n = graph.num_vertices();
        let mut rank = vec![1.0 / n as f64; n];
        for _ in 0..rounds {
            rank = self.step(graph, &inn, &rank);
        }
        rank
    }

    /// Iterates from the uniform vector until a round changes no rank by
    /// `epsilon` or more, or `cap` rounds have run. Returns the ranks and
    /// the number of rounds.
    pub fn converge(&self, graph: &Graph, epsilon: f64, cap: usize) -> (Vec<f64>, usize) {
        let inn = graph.in_adjacency();
        let n = graph.num_vertices();
        let mut rank = vec![1.0 / n as f64; n];
        for round in 1..=cap {
            let next = self.step(graph, &inn, &rank);
            let delta = linf(&next, &rank);
            rank = next;
            if delta < epsilon {
                return (rank, round);
            }
        }
        (rank, cap)
    }
}

/// Largest absolute elementwise difference.
pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |d, (x, y)| d.max((x - y).abs()))
}

/// Vertices holding the maximum of their weakly connected component:
/// max-vertex inputs for `values == vertex_values(graph)`, ids for
/// `values == ids`. Ties keep every holder.
pub fn component_holders(graph: &Graph, values: &[f64]) -> Vec<VertexId> {
    let mut uf = weak_components(graph);
    let n = graph.num_vertices();
    let mut best = vec![f64::NEG_INFINITY; n];
    for (v, &x) in values.iter().enumerate() {
        let r = uf.find(v);
        best[r] = best[r].max(x);
    }
    (0..n)
        .filter(|&v| values[v] == best[uf.find(v)])
        .map(|v| VertexId(v as u64))
        .collect()
}

pub fn vertex_ids(graph: &Graph) -> Vec<f64> {
    graph.vertices().map(|v| v.0 as f64).collect()
}

fn owners(partitions: &[Partition]) -> HashMap<VertexId, SubgraphId> {
    partitions
        .iter()
        .flat_map(|p| &p.subgraphs)
        .flat_map(|s| s.vertices().iter().map(move |&v| (v, s.id())))
        .collect()
}

/// Supersteps a max-propagating traversal (max-vertex, connected
/// components) needs on `partitions`: two plus the largest meta-graph hop
/// count from any sub-graph to the nearest sub-graph holding a maximum.
pub fn propagation_supersteps(partitions: &[Partition], holders: &[VertexId]) -> u64 {
    let meta = build_meta_graph(partitions);
    let owner = owners(partitions);
    let mut dist: BTreeMap<SubgraphId, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for v in holders {
        let s = owner[v];
        if dist.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for t in meta.neighbors(s) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(t) {
                e.insert(d + 1);
                queue.push_back(t);
            }
        }
    }
    2 + dist.values().copied().max().unwrap_or(0) as u64
}

/// Whether contracting sub-graphs provably shortens the propagation: every
/// vertex farthest (ignoring direction) from the holders has some shortest
/// path that uses a local edge of `partitions`. When it does, sub-graph
/// mode needs strictly fewer supersteps than vertex emulation.
pub fn local_edge_on_every_longest_path(graph: &Graph, partitions: &[Partition], holders: &[VertexId]) -> bool {
    let owner = owners(partitions);
    let adj = graph.undirected_adjacency();
    let n = graph.num_vertices();
    let mut dist = vec![usize::MAX; n];
    let mut via_local = vec![false; n];
    let mut queue = VecDeque::new();
    for v in holders {
        if dist[v.index()] == usize::MAX {
            dist[v.index()] = 0;
            queue.push_back(*v);
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &w in &adj[u.index()] {
            if dist[w.index()] == usize::MAX {
                dist[w.index()] = dist[u.index()] + 1;
                queue.push_back(w);
            }
        }
    }
    for &u in &order {
        for &w in &adj[u.index()] {
            if dist[w.index()] == dist[u.index()] + 1 && (via_local[u.index()] || owner[&u] == owner[&w]) {
                via_local[w.index()] = true;
            }
        }
    }
    let far = order.iter().map(|v| dist[v.index()]).max().unwrap_or(0);
    far > 0 && order.iter().filter(|v| dist[v.index()] == far).all(|v| via_local[v.index()])
}
