mod common;

use common::*;
use subgraph_core::algorithms::{vertex_centric_emulation, Algorithm, AlgorithmConfig, AlgorithmError};
use subgraph_core::generate::{self, chain, bridged_stars, planted_blocks};
use subgraph_core::graph::{graph_from_edges, Graph, GraphBuilder};
use subgraph_core::oracle::{self, PowerIteration};
use subgraph_core::partition::{build_partitions, PartitionMap};
use subgraph_core::{PartitionId, VertexId};

fn reals(run: &subgraph_core::algorithms::AlgorithmRun) -> Vec<f64> {
    run.values.reals().expect("real values").iter().map(|x| x.1).collect()
}

#[test]
fn figure_takes_four_supersteps_and_seven_emulated() {
    let (g, map) = bridged_stars();
    let parts = build_partitions(&g, &map);
    let sizes: Vec<usize> = parts.iter().flat_map(|p| &p.subgraphs).map(|s| s.num_vertices()).collect();
    let mut sorted = sizes.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![4, 5, 6]);
    let (sub, emu) = run_both(&AlgorithmConfig::new(Algorithm::MaxVertex), &g, &map);
    assert_eq!(sub.stats.supersteps, 4);
    assert_eq!(emu.stats.supersteps, 7);
    assert!(reals(&sub).iter().all(|&x| x == 14.0));
    assert_eq!(reals(&sub), reals(&emu));
}

#[test]
fn single_subgraph_max_vertex_is_two_supersteps() {
    let g = chain(9);
    let map = split(&g, 1);
    let (sub, emu) = run_both(&AlgorithmConfig::new(Algorithm::MaxVertex), &g, &map);
    assert_eq!(sub.stats.supersteps, 2);
    // vertex-centric on a chain: one superstep per hop plus set-up and quiesce
    assert_eq!(emu.stats.supersteps, 9 + 1);
}

#[test]
fn lone_vertex_value_42() {
    let mut g = graph_from_edges(1, false, &[]);
    use subgraph_core::attr::{AttrDef, AttrScope, AttrType, AttrValue, AttributeColumn};
    let def = AttrDef::new("value", AttrType::Int64, AttrScope::Vertex);
    g.set_vertex_attr(AttributeColumn::new(def, vec![Some(AttrValue::Int64(42))]).unwrap())
        .unwrap();
    let r = run(&AlgorithmConfig::new(Algorithm::MaxVertex), build_partitions(&g, &split(&g, 1)));
    assert_eq!(reals(&r), vec![42.0]);
    assert_eq!(r.stats.supersteps, 2);
}

#[test]
fn two_disjoint_edges_two_components() {
    let g = graph_from_edges(4, false, &[(0, 1), (2, 3)]);
    for k in [1, 2, 4] {
        let r = run(&AlgorithmConfig::new(Algorithm::ConnectedComponents), build_partitions(&g, &split(&g, k)));
        let labels: Vec<u64> = r.values.labels().unwrap().iter().map(|x| x.1).collect();
        assert_eq!(labels, vec![1, 1, 3, 3]);
    }
}

#[test]
fn sssp_chain_and_missing_source() {
    let g = chain(4);
    let cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
    for k in [1, 2, 4] {
        let r = run(&cfg, build_partitions(&g, &split(&g, k)));
        assert_eq!(reals(&r), vec![0.0, 1.0, 2.0, 3.0]);
    }
    let cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(99));
    let err = subgraph_core::algorithms::run_algorithm(&cfg, build_partitions(&g, &split(&g, 1)), &engine());
    assert!(matches!(err, Err(AlgorithmError::SourceNotFound(VertexId(99)))));
}

#[test]
fn oracle_equivalence_on_random_graphs() {
    for (g, k) in corpus(24, 600, 100) {
        let map = split(&g, k);
        let cc = run(&AlgorithmConfig::new(Algorithm::ConnectedComponents), build_partitions(&g, &map));
        assert_eq!(cc.values.labels().unwrap(), oracle::cc_labels(&g).as_slice(), "cc on {}", g.name());

        let mx = run(&AlgorithmConfig::new(Algorithm::MaxVertex), build_partitions(&g, &map));
        assert_eq!(mx.values.reals().unwrap(), oracle::max_vertex(&g).as_slice(), "max on {}", g.name());

        for weighted in [false, true] {
            let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
            cfg.weighted = weighted;
            let r = run(&cfg, build_partitions(&g, &map));
            assert_eq!(r.values.reals().unwrap(), oracle::sssp(&g, VertexId(0), weighted).as_slice());
        }

        let pr = run(&AlgorithmConfig::new(Algorithm::PageRank), build_partitions(&g, &map));
        let expected = PowerIteration::default().run(&g, 30);
        assert!(oracle::linf(&reals(&pr), &expected) <= 1e-9, "pagerank on {}", g.name());
        assert_eq!(pr.stats.supersteps, 31);
    }
}

#[test]
fn pagerank_is_layout_independent() {
    let (g, k) = corpus(2, 300, 7).remove(1);
    let map = split(&g, k);
    let (sub, emu) = run_both(&AlgorithmConfig::new(Algorithm::PageRank), &g, &map);
    assert_eq!(reals(&sub), reals(&emu));
    assert!(sub.stats.total_remote() < emu.stats.total_remote());
}

#[test]
fn pagerank_small_cases() {
    let g = graph_from_edges(2, true, &[(0, 1), (1, 0)]);
    for n in 1..5 {
        let mut cfg = AlgorithmConfig::new(Algorithm::PageRank);
        cfg.iterations = n;
        let r = run(&cfg, build_partitions(&g, &split(&g, 2)));
        assert_eq!(reals(&r), vec![0.5, 0.5]);
    }
    let g = graph_from_edges(1, true, &[]);
    let mut cfg = AlgorithmConfig::new(Algorithm::PageRank);
    cfg.iterations = 1;
    cfg.redistribute_dangling = false;
    let r = run(&cfg, build_partitions(&g, &split(&g, 1)));
    assert!((reals(&r)[0] - 0.15).abs() < 1e-15);
}

#[test]
fn pagerank_tolerance_mode_matches_converging_oracle() {
    let (g, assignment) = planted_blocks(4, 25, 30, 12, true, 5);
    let map = PartitionMap::from_assignment(&g, 4, assignment).unwrap();
    let mut cfg = AlgorithmConfig::new(Algorithm::PageRank);
    cfg.tolerance = Some(1e-8);
    cfg.iterations = 500;
    let r = run(&cfg, build_partitions(&g, &map));
    let (expected, rounds) = PowerIteration::default().converge(&g, 1e-8, 500);
    assert!(oracle::linf(&reals(&r), &expected) <= 1e-12);
    // one more superstep confirms nobody moved
    assert_eq!(r.rank_supersteps(), rounds as u64 + 1);
}

#[test]
fn blockrank_converges_to_pagerank_in_fewer_rounds() {
    let eps = 1e-7;
    for seed in 0..4 {
        let (g, assignment) = planted_blocks(5, 30, 60, 10, true, seed);
        let map = PartitionMap::from_assignment(&g, 5, assignment).unwrap();
        let mut br = AlgorithmConfig::new(Algorithm::BlockRank);
        br.epsilon = eps;
        br.iterations = 1000;
        let block = run(&br, build_partitions(&g, &map));
        let mut pr = AlgorithmConfig::new(Algorithm::PageRank);
        pr.tolerance = Some(eps);
        pr.iterations = 1000;
        let classic = run(&pr, build_partitions(&g, &map));
        let (truth, _) = PowerIteration::default().converge(&g, 1e-14, 10_000);
        assert!(oracle::linf(&reals(&block), &truth) <= 1e-6);
        assert!(block.rank_supersteps() <= classic.rank_supersteps(), "seed {seed}");
    }
}

#[test]
fn blockrank_single_block_and_mirrored_blocks() {
    let (g, assignment) = planted_blocks(1, 20, 25, 0, true, 3);
    let map = PartitionMap::from_assignment(&g, 1, assignment).unwrap();
    let r = run(&AlgorithmConfig::new(Algorithm::BlockRank), build_partitions(&g, &map));
    let (truth, _) = PowerIteration::default().converge(&g, 1e-14, 10_000);
    assert!(oracle::linf(&reals(&r), &truth) <= 1e-6);

    // two copies of the same block, no edges between them
    let mut b = GraphBuilder::new(8, true);
    for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)] {
        b.add_edge(u, v);
        b.add_edge(u + 4, v + 4);
    }
    let g = b.build().unwrap().graph;
    let assignment = (0..8).map(|v| PartitionId(u32::from(v >= 4))).collect();
    let map = PartitionMap::from_assignment(&g, 2, assignment).unwrap();
    let r = reals(&run(&AlgorithmConfig::new(Algorithm::BlockRank), build_partitions(&g, &map)));
    for v in 0..4 {
        assert!((r[v] - r[v + 4]).abs() < 1e-12);
    }
    assert!((r[..4].iter().sum::<f64>() - 0.5).abs() < 1e-9);
}

#[test]
fn superstep_bound_and_emulation_comparison() {
    for (g, k) in corpus(20, 400, 300) {
        let map = split(&g, k);
        let sub_parts = build_partitions(&g, &map);
        let emu_parts = vertex_centric_emulation(&g, &map);
        for (algo, values) in [
            (Algorithm::MaxVertex, oracle::vertex_values(&g)),
            (Algorithm::ConnectedComponents, oracle::vertex_ids(&g)),
        ] {
            let holders = oracle::component_holders(&g, &values);
            let cfg = AlgorithmConfig::new(algo);
            let sub = run(&cfg, sub_parts.clone());
            let emu = run(&cfg, emu_parts.clone());
            assert_eq!(sub.stats.supersteps, oracle::propagation_supersteps(&sub_parts, &holders));
            assert_eq!(emu.stats.supersteps, oracle::propagation_supersteps(&emu_parts, &holders));
            assert!(sub.stats.supersteps <= emu.stats.supersteps);
            if oracle::local_edge_on_every_longest_path(&g, &sub_parts, &holders) {
                assert!(sub.stats.supersteps < emu.stats.supersteps, "{algo} on {}", g.name());
            }
            assert!(sub.stats.total_remote() <= emu.stats.total_remote());
        }
        let cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
        let sub = run(&cfg, sub_parts.clone());
        let emu = run(&cfg, emu_parts.clone());
        assert!(sub.stats.supersteps <= emu.stats.supersteps);
    }
}

#[test]
fn sssp_subgraph_mode_on_block_structured_graphs() {
    let (g, map) = bridged_stars();
    let cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(14));
    let (sub, emu) = run_both(&cfg, &g, &map);
    assert!(sub.stats.total_remote() <= emu.stats.total_remote());
    for seed in 0..3 {
        let (g, assignment) = planted_blocks(4, 40, 40, 12, false, seed);
        let map = PartitionMap::from_assignment(&g, 4, assignment).unwrap();
        let cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
        let (sub, emu) = run_both(&cfg, &g, &map);
        assert_eq!(sub.values, emu.values);
        assert!(sub.stats.supersteps < emu.stats.supersteps);
    }
}

#[test]
fn chain_of_subgraphs_respects_cc_bounds() {
    // four 3-vertex blocks in a line, alternating over two partitions
    let g = chain(12);
    let assignment = (0..12).map(|v| PartitionId(((v / 3) % 2) as u32)).collect();
    let map = PartitionMap::from_assignment(&g, 2, assignment).unwrap();
    let parts = build_partitions(&g, &map);
    let meta = subgraph_core::partition::build_meta_graph(&parts);
    assert_eq!(meta.diameter(), 3);
    let r = run(&AlgorithmConfig::new(Algorithm::ConnectedComponents), parts);
    assert!(r.stats.supersteps <= 4 + 2);
    assert!(r.stats.supersteps as usize > meta.diameter());
}

#[test]
fn rank_sums_to_one_each_round() {
    let g = generate::generate(&generate::Spec {
        vertices: 120,
        model: generate::Model::ErdosRenyi { edges: 150 },
        directed: true,
        weighted: false,
        values: false,
        seed: 11,
    });
    let map = split(&g, 4);
    for n in 1..8 {
        let mut cfg = AlgorithmConfig::new(Algorithm::PageRank);
        cfg.iterations = n;
        let r = run(&cfg, build_partitions(&g, &map));
        assert!((reals(&r).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sssp_rejects_negative_weights() {
    let mut b = GraphBuilder::new(2, true);
    b.add_weighted_edge(0, 1, -1.0);
    let g = b.build().unwrap().graph;
    let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
    cfg.weighted = true;
    let err = subgraph_core::algorithms::run_algorithm(&cfg, build_partitions(&g, &split(&g, 1)), &engine());
    assert!(err.is_err());
}

#[test]
fn gated_sssp_sends_no_more_remote_messages_than_emulation() {
    let mut fixtures: Vec<(Graph, PartitionMap)> = vec![bridged_stars()];
    for seed in 0..3 {
        let (g, assignment) = planted_blocks(4, 40, 40, 12, seed % 2 == 1, seed);
        let map = PartitionMap::from_assignment(&g, 4, assignment).unwrap();
        fixtures.push((g, map));
    }
    for (g, k) in corpus(24, 400, 300) {
        let map = split(&g, k);
        fixtures.push((g, map));
    }
    for (g, map) in &fixtures {
        let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
        cfg.frontier_gated = true;
        let (sub, emu) = run_both(&cfg, g, map);
        let expected = oracle::sssp(g, VertexId(0), false);
        assert_eq!(sub.values.reals().unwrap(), expected.as_slice());
        assert_eq!(emu.values.reals().unwrap(), expected.as_slice());
        assert!(sub.stats.total_remote() <= emu.stats.total_remote());
        assert!(sub.stats.supersteps <= emu.stats.supersteps);
        // gating never changes the emulated run
        cfg.frontier_gated = false;
        let plain = run(&cfg, vertex_centric_emulation(g, map));
        assert_eq!(plain.stats.total_remote(), emu.stats.total_remote());
    }
    let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
    cfg.frontier_gated = true;
    cfg.weighted = true;
    assert!(cfg.check().is_err());
}
