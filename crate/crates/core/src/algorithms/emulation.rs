use crate::graph::Graph;
use crate::error::PartitionError;
use crate::partition::{assemble_partitions, graph_from_partitions, PartitionMap};
use crate::ids::PartitionId;
use crate::model::Partition;

/// Vertex-centric layout: partitions follow `map`, but every vertex is its
/// own sub-graph and every edge between distinct vertices is remote.
///
/// Edges between two singleton sub-graphs of the same partition therefore
/// travel as messages even though they never leave the worker. The layout
/// deliberately breaks the maximal-component rule, so it does not pass
/// partition validation.
pub fn vertex_centric_emulation(graph: &Graph, map: &PartitionMap) -> Vec<Partition> {
    let mut groups: Vec<Vec<Vec<_>>> = vec![Vec::new(); map.k()];
    for v in graph.vertices() {
        groups[map.partition_of(v).index()].push(vec![v]);
    }
    assemble_partitions(graph, groups)
}

/// [`vertex_centric_emulation`] of an already-built layout, keeping its
/// vertex placement.
pub fn emulate_partitions(partitions: &[Partition]) -> Result<Vec<Partition>, PartitionError> {
    let graph = graph_from_partitions(partitions)?;
    let mut assignment = vec![PartitionId(0); graph.num_vertices()];
    for p in partitions {
        for v in p.vertices() {
            assignment[v.index()] = p.id;
        }
    }
    let map = PartitionMap::from_assignment(&graph, partitions.len(), assignment)?;
    Ok(vertex_centric_emulation(&graph, &map))
}
