//! Whole-graph representation used at ingest time and by the reference
//! oracles. Out-adjacency is stored in CSR form with neighbor lists sorted
//! by id; undirected graphs store both arcs of every edge.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::attr::{AttrDef, AttrScope, AttrType, AttrValue, AttributeColumn, AttributeSchema};
use crate::error::ModelError;
use crate::ids::VertexId;

/// Name of the edge attribute carrying SSSP weights.
pub const WEIGHT_ATTR: &str = "weight";
/// Name of the vertex attribute carrying max-vertex input values.
pub const VALUE_ATTR: &str = "value";
/// Name of the vertex attribute carrying original (pre-remap) labels.
pub const LABEL_ATTR: &str = "label";

#[derive(Debug, Clone)]
pub struct Graph {
    name: String,
    directed: bool,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    vertex_attrs: BTreeMap<String, AttributeColumn>,
    edge_attrs: BTreeMap<String, AttributeColumn>,
}

impl Graph {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Stored arcs: each undirected edge counts twice, a self-loop once.
    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    /// Logical edge count: arcs for directed graphs, unordered pairs otherwise.
    pub fn num_edges(&self) -> usize {
        if self.directed {
            return self.targets.len();
        }
        let loops = self
            .vertices()
            .filter(|&v| self.out_neighbors(v).binary_search(&v).is_ok())
            .count();
        (self.targets.len() - loops) / 2 + loops
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.num_vertices() as u64).map(VertexId)
    }

    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.edge_range(v)]
    }

    /// Arc positions of `v`'s out-edges; these index edge attribute columns.
    pub fn edge_range(&self, v: VertexId) -> Range<usize> {
        self.offsets[v.index()]..self.offsets[v.index() + 1]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.edge_range(v).len()
    }

    /// In-adjacency lists (sorted). Equal to out-adjacency for undirected graphs.
    pub fn in_adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut inn = vec![Vec::new(); self.num_vertices()];
        for u in self.vertices() {
            for &v in self.out_neighbors(u) {
                inn[v.index()].push(u);
            }
        }
        inn
    }

    /// Neighbors ignoring direction, sorted and deduplicated, self excluded.
    pub fn undirected_adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj: Vec<Vec<VertexId>> = self
            .vertices()
            .map(|v| self.out_neighbors(v).to_vec())
            .collect();
        if self.directed {
            for u in self.vertices() {
                for &v in self.out_neighbors(u) {
                    adj[v.index()].push(u);
                }
            }
        }
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            list.retain(|v| v.index() != i);
        }
        adj
    }

    pub fn vertex_attr(&self, name: &str) -> Option<&AttributeColumn> {
        self.vertex_attrs.get(name)
    }

    pub fn edge_attr(&self, name: &str) -> Option<&AttributeColumn> {
        self.edge_attrs.get(name)
    }

    /// Definitions of every vertex and edge attribute.
    pub fn schema(&self) -> AttributeSchema {
        let mut schema = AttributeSchema::new();
        for col in self.vertex_attrs().chain(self.edge_attrs()) {
            schema.insert(col.def().clone());
        }
        schema
    }

    pub fn vertex_attrs(&self) -> impl Iterator<Item = &AttributeColumn> {
        self.vertex_attrs.values()
    }

    pub fn edge_attrs(&self) -> impl Iterator<Item = &AttributeColumn> {
        self.edge_attrs.values()
    }

    /// Attaches a vertex attribute column; its length must equal the vertex count.
    pub fn set_vertex_attr(&mut self, column: AttributeColumn) -> Result<(), ModelError> {
        if column.len() != self.num_vertices() || column.def().scope != AttrScope::Vertex {
            return Err(ModelError::AttributeLength {
                name: column.name().to_string(),
                expected: self.num_vertices(),
                found: column.len(),
            });
        }
        self.vertex_attrs.insert(column.name().to_string(), column);
        Ok(())
    }

    pub fn set_edge_attr(&mut self, column: AttributeColumn) -> Result<(), ModelError> {
        if column.len() != self.num_arcs() || column.def().scope != AttrScope::Edge {
            return Err(ModelError::AttributeLength {
                name: column.name().to_string(),
                expected: self.num_arcs(),
                found: column.len(),
            });
        }
        self.edge_attrs.insert(column.name().to_string(), column);
        Ok(())
    }

    /// Weight of arc position `arc`, defaulting to 1 when absent.
    pub fn arc_weight(&self, arc: usize) -> f64 {
        self.edge_attrs
            .get(WEIGHT_ATTR)
            .and_then(|c| c.get(arc))
            .and_then(AttrValue::as_f64)
            .unwrap_or(1.0)
    }
}

/// Accumulates edges and produces a deduplicated [`Graph`].
#[derive(Debug)]
pub struct GraphBuilder {
    num_vertices: usize,
    directed: bool,
    edges: Vec<(VertexId, VertexId, Option<f64>)>,
    any_weight: bool,
}

/// Outcome of [`GraphBuilder::build`].
#[derive(Debug)]
pub struct Built {
    pub graph: Graph,
    /// Parallel edges dropped while collapsing (first occurrence kept).
    pub duplicates: usize,
}

impl GraphBuilder {
    pub fn new(num_vertices: usize, directed: bool) -> Self {
        GraphBuilder {
            num_vertices,
            directed,
            edges: Vec::new(),
            any_weight: false,
        }
    }

    pub fn add_edge(&mut self, u: u64, v: u64) -> &mut Self {
        self.edges.push((VertexId(u), VertexId(v), None));
        self
    }

    pub fn add_weighted_edge(&mut self, u: u64, v: u64, w: f64) -> &mut Self {
        self.any_weight = true;
        self.edges.push((VertexId(u), VertexId(v), Some(w)));
        self
    }

    pub fn build(self) -> Result<Built, ModelError> {
        let n = self.num_vertices;
        let mut arcs: Vec<(VertexId, VertexId, Option<f64>, usize)> =
            Vec::with_capacity(self.edges.len() * if self.directed { 1 } else { 2 });
        for (order, &(u, v, w)) in self.edges.iter().enumerate() {
            for x in [u, v] {
                if x.index() >= n {
                    return Err(ModelError::VertexOutOfRange(x.0, n));
                }
            }
            arcs.push((u, v, w, order));
            if !self.directed && u != v {
                arcs.push((v, u, w, order));
            }
        }
        // first occurrence of each (u, v) wins
        arcs.sort_by_key(|&(u, v, _, order)| (u, v, order));
        let before = arcs.len();
        arcs.dedup_by_key(|&mut (u, v, _, _)| (u, v));
        let dropped_arcs = before - arcs.len();

        let mut offsets = vec![0usize; n + 1];
        for &(u, ..) in &arcs {
            offsets[u.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<VertexId> = arcs.iter().map(|a| a.1).collect();

        let mut graph = Graph {
            name: String::from("graph"),
            directed: self.directed,
            offsets,
            targets,
            vertex_attrs: BTreeMap::new(),
            edge_attrs: BTreeMap::new(),
        };
        if self.any_weight {
            let def = AttrDef::new(WEIGHT_ATTR, AttrType::Float64, AttrScope::Edge);
            let values = arcs.iter().map(|a| a.2.map(AttrValue::Float64)).collect();
            graph.set_edge_attr(AttributeColumn::new(def, values)?)?;
        }
        let duplicates = if self.directed {
            dropped_arcs
        } else {
            // undirected non-loop duplicates drop two arcs each
            let loops_dropped = {
                let mut seen = std::collections::HashSet::new();
                self.edges
                    .iter()
                    .filter(|(u, v, _)| u == v && !seen.insert(*u))
                    .count()
            };
            (dropped_arcs - loops_dropped) / 2 + loops_dropped
        };
        Ok(Built { graph, duplicates })
    }
}

/// Convenience for tests and fixtures: unweighted graph from an edge slice.
pub fn graph_from_edges(num_vertices: usize, directed: bool, edges: &[(u64, u64)]) -> Graph {
    let mut b = GraphBuilder::new(num_vertices, directed);
    for &(u, v) in edges {
        b.add_edge(u, v);
    }
    b.build().expect("fixture edges in range").graph
}
