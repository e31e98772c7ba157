use std::collections::BTreeSet;

use proptest::prelude::*;

use subgraph_core::algorithms::{run_algorithm, Algorithm, AlgorithmConfig};
use subgraph_core::gofs::{write_store, GraphInfo, GraphStore};
use subgraph_core::gopher::EngineConfig;
use subgraph_core::graph::{Graph, GraphBuilder};
use subgraph_core::model::{validate_cluster, validate_partition, Partition};
use subgraph_core::oracle;
use subgraph_core::algorithms::{emulate_partitions, vertex_centric_emulation};
use subgraph_core::partition::{build_partitions, discover_subgraphs, graph_from_partitions, PartitionMap};
use subgraph_core::{PartitionId, VertexId};

/// A small graph with integer weights and an arbitrary vertex placement.
#[derive(Debug, Clone)]
struct Case {
    graph: Graph,
    map: PartitionMap,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..40, 1usize..5, any::<bool>())
        .prop_flat_map(|(n, k, directed)| {
            let edges = proptest::collection::vec((0..n as u64, 0..n as u64, 1u32..10), 0..90);
            let placement = proptest::collection::vec(0..k as u32, n);
            (Just(n), Just(k), Just(directed), edges, placement)
        })
        .prop_map(|(n, k, directed, edges, placement)| {
            let mut b = GraphBuilder::new(n, directed);
            for (u, v, w) in edges {
                b.add_weighted_edge(u, v, w as f64);
            }
            let graph = b.build().unwrap().graph;
            let map = PartitionMap::from_assignment(&graph, k, placement.into_iter().map(PartitionId).collect()).unwrap();
            Case { graph, map }
        })
}

fn engine() -> EngineConfig {
    EngineConfig {
        pool_width: 1,
        ..EngineConfig::default()
    }
}

fn vertex_sets(parts: &[Partition]) -> Vec<Vec<VertexId>> {
    parts
        .iter()
        .flat_map(|p| p.subgraphs.iter().map(|s| s.vertices().to_vec()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_partitions_are_well_formed(c in case()) {
        let parts = build_partitions(&c.graph, &c.map);
        for p in &parts {
            prop_assert!(validate_partition(p).is_empty(), "{:?}", validate_partition(p));
        }
        prop_assert!(validate_cluster(&parts).is_empty());
    }

    #[test]
    fn vertices_and_arcs_are_conserved(c in case()) {
        let parts = build_partitions(&c.graph, &c.map);
        let mut seen = BTreeSet::new();
        let mut arcs = 0;
        for p in &parts {
            for sg in &p.subgraphs {
                prop_assert_eq!(c.map.partition_of(sg.vertices()[0]), p.id);
                for &v in sg.vertices() {
                    prop_assert!(seen.insert(v));
                }
                arcs += sg.num_local_arcs() + sg.num_remote_edges();
            }
        }
        prop_assert_eq!(seen.len(), c.graph.num_vertices());
        prop_assert_eq!(arcs, c.graph.num_arcs());
    }

    #[test]
    fn subgraph_discovery_is_idempotent(c in case()) {
        let parts = build_partitions(&c.graph, &c.map);
        for p in &parts {
            let again = discover_subgraphs(p);
            prop_assert_eq!(again.len(), p.subgraphs.len());
            for (a, b) in again.iter().zip(&p.subgraphs) {
                prop_assert_eq!(a.id(), b.id());
                prop_assert!(a.same_topology(b));
            }
        }
    }

    #[test]
    fn subgraphs_refine_components(c in case()) {
        let parts = build_partitions(&c.graph, &c.map);
        let count = vertex_sets(&parts).len();
        let wcc = oracle::component_count(&c.graph);
        prop_assert!(count >= wcc);
        prop_assert!(count <= c.graph.num_vertices());
        let labels = oracle::cc_labels(&c.graph);
        for set in vertex_sets(&parts) {
            let first = labels[set[0].index()].1;
            prop_assert!(set.iter().all(|v| labels[v.index()].1 == first));
        }
        if c.map.k() == 1 {
            prop_assert_eq!(count, wcc);
        }
    }

    #[test]
    fn store_round_trip(c in case()) {
        let dir = tempfile::tempdir().unwrap();
        let parts = build_partitions(&c.graph, &c.map);
        let schema = c.graph.schema();
        let info = GraphInfo { name: c.graph.name(), directed: c.graph.is_directed(), k: c.map.k(), schema: &schema };
        write_store(dir.path(), &info, &parts).unwrap();
        // edgeless graphs carry no weight column
        let attrs: &[&str] = if c.graph.edge_attr("weight").is_some() { &["weight"] } else { &[] };
        let loaded = GraphStore::open(dir.path()).unwrap().load(attrs).unwrap();
        prop_assert_eq!(loaded.len(), parts.len());
        for (a, b) in parts.iter().zip(&loaded) {
            prop_assert_eq!(a.subgraphs.len(), b.subgraphs.len());
            for (x, y) in a.subgraphs.iter().zip(&b.subgraphs) {
                prop_assert!(x.same_topology(y));
                prop_assert_eq!(x.attribute("weight"), y.attribute("weight"));
            }
        }
    }

    #[test]
    fn sssp_reaches_the_relaxation_fixpoint(c in case(), pick in any::<prop::sample::Index>()) {
        let source = VertexId(pick.index(c.graph.num_vertices()) as u64);
        let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(source);
        cfg.weighted = true;
        let run = run_algorithm(&cfg, build_partitions(&c.graph, &c.map), &engine()).unwrap();
        let dist: Vec<f64> = run.values.reals().unwrap().iter().map(|x| x.1).collect();
        prop_assert_eq!(dist[source.index()], 0.0);
        for u in c.graph.vertices() {
            for (arc, v) in c.graph.edge_range(u).zip(c.graph.out_neighbors(u)) {
                prop_assert!(dist[v.index()] <= dist[u.index()] + c.graph.arc_weight(arc));
            }
        }
        let expected: Vec<f64> = oracle::sssp(&c.graph, source, true).into_iter().map(|x| x.1).collect();
        prop_assert_eq!(dist, expected);
    }

    #[test]
    fn labels_match_the_oracle(c in case()) {
        let cc = run_algorithm(&AlgorithmConfig::new(Algorithm::ConnectedComponents), build_partitions(&c.graph, &c.map), &engine()).unwrap();
        prop_assert_eq!(cc.values.labels().unwrap().to_vec(), oracle::cc_labels(&c.graph));
        let max = run_algorithm(&AlgorithmConfig::new(Algorithm::MaxVertex), build_partitions(&c.graph, &c.map), &engine()).unwrap();
        prop_assert_eq!(max.values.reals().unwrap().to_vec(), oracle::max_vertex(&c.graph));
    }

    #[test]
    fn pagerank_mass_is_one(c in case()) {
        let mut cfg = AlgorithmConfig::new(Algorithm::PageRank);
        cfg.iterations = 10;
        let run = run_algorithm(&cfg, build_partitions(&c.graph, &c.map), &engine()).unwrap();
        let ranks: Vec<f64> = run.values.reals().unwrap().iter().map(|x| x.1).collect();
        let sum: f64 = ranks.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {}", sum);
        let expected = oracle::PowerIteration::default().run(&c.graph, 10);
        prop_assert!(oracle::linf(&ranks, &expected) <= 1e-12);
    }

    #[test]
    fn partitions_reassemble_into_the_graph(c in case()) {
        let parts = build_partitions(&c.graph, &c.map);
        let back = graph_from_partitions(&parts).unwrap();
        prop_assert_eq!(back.is_directed(), c.graph.is_directed());
        prop_assert_eq!(back.num_arcs(), c.graph.num_arcs());
        for v in c.graph.vertices() {
            prop_assert_eq!(back.out_neighbors(v), c.graph.out_neighbors(v));
        }
        prop_assert_eq!(back.edge_attr("weight"), c.graph.edge_attr("weight"));
        prop_assert_eq!(emulate_partitions(&parts).unwrap(), vertex_centric_emulation(&c.graph, &c.map));
    }
}
