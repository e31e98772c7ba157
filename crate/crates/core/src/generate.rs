//! Seeded synthetic graphs and hand-built fixtures.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attr::{AttrDef, AttrScope, AttrType, AttrValue, AttributeColumn};
use crate::graph::{Graph, GraphBuilder, VALUE_ATTR};
use crate::ids::PartitionId;
use crate::partition::PartitionMap;

/// Largest integer edge weight produced by the generators.
pub const MAX_WEIGHT: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `G(n, m)`: `m` uniformly random vertex pairs.
    ErdosRenyi { edges: usize },
    /// Each new vertex attaches to `per_vertex` endpoints drawn in
    /// proportion to degree.
    PreferentialAttachment { per_vertex: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spec {
    pub vertices: usize,
    pub model: Model,
    pub directed: bool,
    /// Attach integer weights in `1..=MAX_WEIGHT`.
    pub weighted: bool,
    /// Attach a random integer `value` vertex attribute.
    pub values: bool,
    pub seed: u64,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn edges_for(spec: &Spec, rng: &mut ChaCha8Rng) -> Vec<(u64, u64)> {
    let n = spec.vertices as u64;
    match spec.model {
        Model::ErdosRenyi { edges } => (0..edges)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
            .filter(|(u, v)| u != v)
            .collect(),
        Model::PreferentialAttachment { per_vertex } => {
            let mut out = Vec::new();
            let mut endpoints: Vec<u64> = Vec::new();
            for v in 1..n {
                for _ in 0..per_vertex.min(v as usize) {
                    let u = if endpoints.is_empty() || rng.gen_bool(0.2) {
                        rng.gen_range(0..v)
                    } else {
                        *endpoints.choose(rng).expect("non-empty")
                    };
                    out.push((v, u));
                    endpoints.push(u);
                    endpoints.push(v);
                }
            }
            out
        }
    }
}

fn assemble(n: usize, directed: bool, edges: &[(u64, u64)], weighted: bool, rng: &mut ChaCha8Rng) -> Graph {
    let mut b = GraphBuilder::new(n, directed);
    for &(u, v) in edges {
        if weighted {
            b.add_weighted_edge(u, v, rng.gen_range(1..=MAX_WEIGHT) as f64);
        } else {
            b.add_edge(u, v);
        }
    }
    b.build().expect("generated ids in range").graph
}

/// Adds a `value` column of random integers.
pub fn attach_values(graph: &mut Graph, seed: u64) {
    let mut rng = rng(seed ^ 0x5eed);
    let def = AttrDef::new(VALUE_ATTR, AttrType::Int64, AttrScope::Vertex);
    let values = (0..graph.num_vertices())
        .map(|_| Some(AttrValue::Int64(rng.gen_range(0..1_000_000))))
        .collect();
    graph
        .set_vertex_attr(AttributeColumn::new(def, values).expect("typed values"))
        .expect("sized to graph");
}

pub fn generate(spec: &Spec) -> Graph {
    let mut rng = rng(spec.seed);
    let edges = edges_for(spec, &mut rng);
    let mut g = assemble(spec.vertices, spec.directed, &edges, spec.weighted, &mut rng);
    if spec.values {
        attach_values(&mut g, spec.seed);
    }
    g.set_name(format!("synthetic-{}", spec.seed));
    g
}

/// `blocks` internally connected blocks of `size` vertices, each with
/// `extra` random internal edges on top of a spanning path, plus `cross`
/// random edges between distinct blocks. Block `b` holds vertices
/// `b*size .. (b+1)*size`; the returned map puts block `b` in partition
/// `b`, so every block is exactly one sub-graph.
pub fn planted_blocks(
    blocks: usize,
    size: usize,
    extra: usize,
    cross: usize,
    directed: bool,
    seed: u64,
) -> (Graph, Vec<PartitionId>) {
    let mut rng = rng(seed);
    let n = blocks * size;
    let mut edges = Vec::new();
    for b in 0..blocks {
        let base = (b * size) as u64;
        for i in 1..size as u64 {
            edges.push((base + i - 1, base + i));
            if directed {
                edges.push((base + i, base + i - 1));
            }
        }
        for _ in 0..extra {
            let (u, v) = (rng.gen_range(0..size as u64), rng.gen_range(0..size as u64));
            if u != v {
                edges.push((base + u, base + v));
            }
        }
    }
    if blocks > 1 {
        for _ in 0..cross {
            let a = rng.gen_range(0..blocks);
            let mut c = rng.gen_range(0..blocks - 1);
            if c >= a {
                c += 1;
            }
            let u = (a * size) as u64 + rng.gen_range(0..size as u64);
            let v = (c * size) as u64 + rng.gen_range(0..size as u64);
            edges.push((u, v));
        }
    }
    let mut g = assemble(n, directed, &edges, false, &mut rng);
    g.set_name(format!("blocks-{blocks}x{size}-{seed}"));
    let assignment = (0..n).map(|v| PartitionId((v / size) as u32)).collect();
    (g, assignment)
}

/// Fifteen vertices on two partitions: a six-vertex star in partition 0
/// bridging a four-vertex star and a five-vertex star in partition 1. The
/// meta-graph is a path of three sub-graphs (diameter 2) and the largest
/// vertex, 14, sits in an end sub-graph five hops from the farthest vertex.
pub fn bridged_stars() -> (Graph, PartitionMap) {
    let edges = [
        // partition 0: star around 0
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (0, 5),
        // partition 1: star around 6
        (6, 7),
        (6, 8),
        (6, 9),
        // partition 1: star around 10 with 14 on a leaf
        (10, 11),
        (10, 12),
        (10, 13),
        (10, 14),
        // remote edges
        (0, 6),
        (11, 0),
    ];
    let mut g = crate::graph::graph_from_edges(15, false, &edges);
    g.set_name("figure");
    let assignment = (0..15).map(|v| PartitionId(u32::from(v >= 6))).collect();
    let map = PartitionMap::from_assignment(&g, 2, assignment).expect("two partitions");
    (g, map)
}

/// Undirected path `0 - 1 - ... - (n-1)`.
pub fn chain(n: usize) -> Graph {
    let edges: Vec<(u64, u64)> = (1..n as u64).map(|i| (i - 1, i)).collect();
    crate::graph::graph_from_edges(n, false, &edges)
}
