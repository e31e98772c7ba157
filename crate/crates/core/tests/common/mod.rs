#![allow(dead_code)]

use subgraph_core::algorithms::{run_algorithm, vertex_centric_emulation, AlgorithmConfig, AlgorithmRun};
use subgraph_core::generate::{self, Model, Spec};
use subgraph_core::gopher::EngineConfig;
use subgraph_core::graph::Graph;
use subgraph_core::model::Partition;
use subgraph_core::partition::{build_partitions, partition_graph, PartitionMap, Strategy};

pub fn engine() -> EngineConfig {
    EngineConfig {
        pool_width: 2,
        ..EngineConfig::default()
    }
}

pub fn split(graph: &Graph, k: usize) -> PartitionMap {
    partition_graph(graph, k, &Strategy::default()).expect("partitionable")
}

pub fn subgraph_mode(graph: &Graph, map: &PartitionMap) -> Vec<Partition> {
    build_partitions(graph, map)
}

pub fn run(config: &AlgorithmConfig, partitions: Vec<Partition>) -> AlgorithmRun {
    run_algorithm(config, partitions, &engine()).expect("run succeeds")
}

pub fn run_both(config: &AlgorithmConfig, graph: &Graph, map: &PartitionMap) -> (AlgorithmRun, AlgorithmRun) {
    (
        run(config, build_partitions(graph, map)),
        run(config, vertex_centric_emulation(graph, map)),
    )
}

/// A mixed corpus of small random graphs.
pub fn corpus(count: usize, max_n: usize, seed: u64) -> Vec<(Graph, usize)> {
    (0..count)
        .map(|i| {
            let s = seed + i as u64;
            let n = 10 + (s as usize * 7919) % (max_n - 9);
            let model = if i % 2 == 0 {
                Model::ErdosRenyi { edges: n + n / 2 }
            } else {
                Model::PreferentialAttachment { per_vertex: 1 + i % 3 }
            };
            let g = generate::generate(&Spec {
                vertices: n,
                model,
                directed: i % 3 == 0,
                weighted: true,
                values: i % 4 == 1,
                seed: s,
            });
            (g, [1, 2, 4, 8][i % 4])
        })
        .collect()
}
