//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::{ok, report, s};
use serde_json::Value;
use subgraph_core::algorithms::{run_algorithm, vertex_centric_emulation, Algorithm, AlgorithmConfig, AlgorithmRun};
use subgraph_core::error::StoreError;
use subgraph_core::generate::{self, bridged_stars, planted_blocks, Model, Spec};
use subgraph_core::gofs::format::{encode_attribute, encode_topology, graph_id};
use subgraph_core::gofs::store::{attribute_file_name, partition_dir_name, topology_file_name};
use subgraph_core::gofs::{write_store, GraphInfo, GraphStore, IoCounters, PartitionStore};
use subgraph_core::gopher::explore::explore;
use subgraph_core::gopher::EngineConfig;
use subgraph_core::graph::Graph;
use subgraph_core::model::Partition;
use subgraph_core::oracle::{self, PowerIteration};
use subgraph_core::partition::{build_partitions, partition_graph, PartitionMap, Strategy};
use subgraph_core::VertexId;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn engine() -> EngineConfig {
    EngineConfig::default()
}

fn run(cfg: &AlgorithmConfig, parts: Vec<Partition>) -> AlgorithmRun {
    run_algorithm(cfg, parts, &engine()).expect("run succeeds")
}

fn reals(r: &AlgorithmRun) -> Vec<f64> {
    r.values.reals().expect("real values").iter().map(|x| x.1).collect()
}

fn split(g: &Graph, k: usize) -> PartitionMap {
    partition_graph(g, k, &Strategy::default()).expect("partitionable")
}

/// Random graphs from 10 to 5000 vertices over both models, k in {1, 2, 4, 8}.
fn corpus() -> Vec<(Graph, usize)> {
    let count = 52;
    (0..count)
        .map(|i| {
            let n = 10 + i * (5000 - 10) / (count - 1);
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
                seed: 1000 + i as u64,
            });
            (g, [1, 2, 4, 8][i % 4])
        })
        .collect()
}

/// The corpus plus hand-shaped fixtures, each with its partition map.
fn fixtures() -> Vec<(Graph, PartitionMap)> {
    let mut out = vec![bridged_stars()];
    for seed in 0..4 {
        let (g, assignment) = planted_blocks(4, 40, 40, 12, seed % 2 == 1, seed);
        let map = PartitionMap::from_assignment(&g, 4, assignment).expect("planted map");
        out.push((g, map));
    }
    out.extend(corpus().into_iter().map(|(g, k)| {
        let map = split(&g, k);
        (g, map)
    }));
    out
}

fn figure() -> Verdict {
    let (g, map) = bridged_stars();
    let cfg = AlgorithmConfig::new(Algorithm::MaxVertex);
    let t = Instant::now();
    let sub = run(&cfg, build_partitions(&g, &map));
    let secs = t.elapsed().as_secs_f64();
    let emu = run(&cfg, vertex_centric_emulation(&g, &map));
    let right = reals(&sub).iter().all(|&x| x == 14.0) && sub.values == emu.values;
    verdict(
        sub.stats.supersteps == 4 && emu.stats.supersteps == 7 && right && secs < 1.0,
        format!(
            "{} supersteps sub-graph, {} emulated, values {}, {secs:.3} s",
            sub.stats.supersteps,
            emu.stats.supersteps,
            if right { "correct" } else { "WRONG" }
        ),
    )
}

fn oracle_equivalence() -> Verdict {
    let t = Instant::now();
    let graphs = corpus();
    let mut failures = Vec::new();
    let mut worst_rank = 0.0f64;
    for (g, k) in &graphs {
        let map = split(g, *k);
        let parts = build_partitions(g, &map);
        let name = format!("{} (n {}, k {k})", g.name(), g.num_vertices());
        let cc = run(&AlgorithmConfig::new(Algorithm::ConnectedComponents), parts.clone());
        if cc.values.labels() != Some(oracle::cc_labels(g).as_slice()) {
            failures.push(format!("cc on {name}"));
        }
        let max = run(&AlgorithmConfig::new(Algorithm::MaxVertex), parts.clone());
        if max.values.reals() != Some(oracle::max_vertex(g).as_slice()) {
            failures.push(format!("max on {name}"));
        }
        for weighted in [false, true] {
            let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
            cfg.weighted = weighted;
            let r = run(&cfg, parts.clone());
            if r.values.reals() != Some(oracle::sssp(g, VertexId(0), weighted).as_slice()) {
                failures.push(format!("sssp weighted={weighted} on {name}"));
            }
        }
        let pr = run(&AlgorithmConfig::new(Algorithm::PageRank), parts);
        let d = oracle::linf(&reals(&pr), &PowerIteration::default().run(g, 30));
        worst_rank = worst_rank.max(d);
        if d > 1e-9 {
            failures.push(format!("pagerank on {name} off by {d:e}"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let mut detail = format!(
        "{} graphs, n 10..5000, k 1/2/4/8; cc, max, sssp unit and weighted exact; pagerank max error {worst_rank:e}; {secs:.1} s",
        graphs.len()
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; mismatches: {}", failures.join(", ")));
    }
    verdict(failures.is_empty() && secs < 60.0, detail)
}

struct Comparison {
    name: String,
    algorithm: &'static str,
    sub: AlgorithmRun,
    emu: AlgorithmRun,
    predicted: Option<(u64, u64, bool)>,
}

fn compare_modes(fixtures: &[(Graph, PartitionMap)]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (g, map) in fixtures {
        let sub_parts = build_partitions(g, map);
        let emu_parts = vertex_centric_emulation(g, map);
        for (algorithm, label, values) in [
            (Algorithm::MaxVertex, "max", oracle::vertex_values(g)),
            (Algorithm::ConnectedComponents, "cc", oracle::vertex_ids(g)),
        ] {
            let holders = oracle::component_holders(g, &values);
            let cfg = AlgorithmConfig::new(algorithm);
            out.push(Comparison {
                name: g.name().to_string(),
                algorithm: label,
                sub: run(&cfg, sub_parts.clone()),
                emu: run(&cfg, emu_parts.clone()),
                predicted: Some((
                    oracle::propagation_supersteps(&sub_parts, &holders),
                    oracle::propagation_supersteps(&emu_parts, &holders),
                    oracle::local_edge_on_every_longest_path(g, &sub_parts, &holders),
                )),
            });
        }
        for (gated, label) in [(true, "sssp-gated"), (false, "sssp-eager")] {
            let mut cfg = AlgorithmConfig::new(Algorithm::Sssp).with_source(VertexId(0));
            cfg.frontier_gated = gated;
            out.push(Comparison {
                name: g.name().to_string(),
                algorithm: label,
                sub: run(&cfg, sub_parts.clone()),
                emu: run(&cfg, emu_parts.clone()),
                predicted: None,
            });
        }
    }
    out
}

fn superstep_bound(rows: &[Comparison]) -> Verdict {
    let mut checked = 0;
    let mut strict = 0;
    let mut failures = Vec::new();
    for c in rows {
        let Some((sub_pred, emu_pred, shortcut)) = c.predicted else {
            continue;
        };
        checked += 1;
        let (sub, emu) = (c.sub.stats.supersteps, c.emu.stats.supersteps);
        if sub != sub_pred || emu != emu_pred {
            failures.push(format!(
                "{} on {}: {sub}/{emu} supersteps, predicted {sub_pred}/{emu_pred}",
                c.algorithm, c.name
            ));
        }
        if sub > emu || (shortcut && sub >= emu) {
            failures.push(format!("{} on {}: {sub} vs {emu} emulated", c.algorithm, c.name));
        }
        if shortcut {
            strict += 1;
        }
    }
    let mut detail = format!(
        "cc and max on {checked} runs equal the nearest-holder prediction and never exceed emulation; {strict} runs have a local edge on every longest path and all of them are strictly faster"
    );
    if !failures.is_empty() {
        detail = format!("{}; violations: {}", failures.len(), failures.join(", "));
    }
    verdict(failures.is_empty(), detail)
}

fn message_reduction(rows: &[Comparison]) -> Verdict {
    let mut failures = Vec::new();
    let mut eager_over = Vec::new();
    let mut eager_total = 0;
    let (mut sub_total, mut emu_total) = (0u64, 0u64);
    for c in rows {
        let (sub, emu) = (c.sub.stats.total_remote(), c.emu.stats.total_remote());
        if c.sub.values != c.emu.values {
            failures.push(format!("{} on {}: modes disagree", c.algorithm, c.name));
        }
        if c.algorithm == "sssp-eager" {
            eager_total += 1;
            if sub > emu {
                eager_over.push(format!("{} ({sub} vs {emu})", c.name));
            }
            continue;
        }
        sub_total += sub;
        emu_total += emu;
        if sub > emu {
            failures.push(format!("{} on {}: {sub} remote vs {emu} emulated", c.algorithm, c.name));
        }
    }
    let mut detail = format!(
        "cc, max and frontier-gated sssp send {sub_total} remote messages in total vs {emu_total} emulated, never more on any run; eager sssp is above emulation on {}/{eager_total} graphs",
        eager_over.len()
    );
    if !eager_over.is_empty() {
        detail.push_str(&format!(" [{}]", eager_over.join(", ")));
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; violations: {}", failures.join(", ")));
    }
    verdict(failures.is_empty(), detail)
}

fn store_graph(name: &str, spec: &Spec) -> Graph {
    let mut g = generate::generate(spec);
    g.set_name(name);
    g
}

fn storage() -> Verdict {
    let graphs = [
        store_graph(
            "directed-pa",
            &Spec {
                vertices: 60,
                model: Model::PreferentialAttachment { per_vertex: 2 },
                directed: true,
                weighted: true,
                values: true,
                seed: 3,
            },
        ),
        store_graph(
            "sparse-er",
            &Spec {
                vertices: 50,
                model: Model::ErdosRenyi { edges: 45 },
                directed: false,
                weighted: true,
                values: true,
                seed: 4,
            },
        ),
    ];
    let mut files = 0;
    let mut flips = 0;
    let mut failures = Vec::new();
    for g in &graphs {
        let dir = tempfile::tempdir().expect("tempdir");
        let k = 3;
        let parts = build_partitions(g, &split(g, k));
        let schema = g.schema();
        let info = GraphInfo {
            name: g.name(),
            directed: g.is_directed(),
            k,
            schema: &schema,
        };
        write_store(dir.path(), &info, &parts).expect("store written");
        let gid = graph_id(g.name());
        let attrs = ["weight", "value"];

        for p in &parts {
            let pdir = dir.path().join(partition_dir_name(p.id));
            let store = PartitionStore::open(&pdir).expect("partition opens");
            for sg in &p.subgraphs {
                let mut slices = vec![(topology_file_name(g.name(), sg.id()), None)];
                slices.extend(attrs.map(|a| (attribute_file_name(g.name(), sg.id(), a), Some(a))));
                for (file, attr) in slices {
                    let path = pdir.join(&file);
                    let original = fs::read(&path).expect("slice exists");
                    let read = || match attr {
                        None => store.read_topology(sg.id()).map(|t| encode_topology(gid, &t)),
                        Some(a) => store.read_attribute(sg.id(), a).map(|c| encode_attribute(gid, sg.id(), &c)),
                    };
                    files += 1;
                    if read().ok().as_ref() != Some(&original) {
                        failures.push(format!("{file} re-encodes differently"));
                    }
                    for pos in 0..original.len() {
                        for mask in [0x01u8, 0x5a, 0xff] {
                            let mut bytes = original.clone();
                            bytes[pos] ^= mask;
                            fs::write(&path, &bytes).expect("rewrite");
                            flips += 1;
                            if !matches!(read(), Err(StoreError::Corrupt { .. })) {
                                failures.push(format!("{file} byte {pos} mask {mask:#x} undetected"));
                            }
                        }
                    }
                    fs::write(&path, &original).expect("restore");
                }
            }
        }

        let counters = IoCounters::new();
        let store = GraphStore::open_with(dir.path(), counters.clone()).expect("store opens");
        for (wanted, unwanted) in [(&["weight"][..], "value"), (&["value"][..], "weight"), (&[][..], "")] {
            counters.reset();
            store.load(wanted).expect("load");
            let leaked: u64 = counters
                .per_file()
                .iter()
                .filter(|(p, _)| {
                    let p = p.to_string_lossy();
                    if unwanted.is_empty() {
                        p.contains(".attr.")
                    } else {
                        p.ends_with(&format!(".attr.{unwanted}"))
                    }
                })
                .map(|(_, b)| b)
                .sum();
            if leaked > 0 {
                failures.push(format!("loading {wanted:?} read {leaked} bytes of other attributes"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{files} slices re-encode byte-identically, {flips} single-byte corruptions all detected, selective loads read 0 bytes of unrequested attributes")
    } else {
        format!("{} problems: {}", failures.len(), failures.join(", "))
    };
    verdict(failures.is_empty(), detail)
}

const ALGORITHMS: [&[&str]; 5] = [
    &["-a", "max-vertex"],
    &["-a", "connected-components"],
    &["-a", "sssp", "--source", "0", "--weighted"],
    &["-a", "pagerank"],
    &["-a", "blockrank", "--epsilon", "1e-8"],
];

fn cli_store(dir: &Path, name: &str, model: &str, k: usize) -> std::path::PathBuf {
    let edges = dir.join(format!("{name}.txt"));
    let count = if model == "erdos-renyi" { "600" } else { "2" };
    ok(&[
        "generate", "-v", "400", "--model", model, "-e", count, "--weighted", "--seed", "11", "-o", s(&edges),
    ]);
    let out = dir.join(name);
    ok(&["ingest", s(&edges), "--out", s(&out), "-k", &k.to_string()]);
    out
}

fn run_report(store: &Path, algo: &[&str], extra: &[&str]) -> Value {
    let mut args = vec!["run", s(store)];
    args.extend_from_slice(algo);
    args.extend_from_slice(extra);
    report(&args)
}

fn protocol() -> Verdict {
    let mut failures = Vec::new();
    let mut states = 0;
    for (k, bound) in [(2, 4), (3, 3), (4, 2)] {
        let r = explore(k, bound);
        states += r.states;
        if !r.violations.is_empty() || r.terminations == 0 {
            failures.push(format!("k={k}: {:?}", r.violations));
        }
    }
    let dir = tempfile::tempdir().expect("tempdir");
    let mut socket_runs = 0;
    for k in [2, 3, 4] {
        let store = cli_store(dir.path(), &format!("smoke{k}"), "preferential-attachment", k);
        for algo in ALGORITHMS {
            let mem = run_report(&store, algo, &["--transport", "memory"]);
            let sock = run_report(&store, algo, &["--transport", "socket"]);
            socket_runs += 1;
            for field in ["digest", "supersteps", "messages"] {
                if mem[field] != sock[field] {
                    failures.push(format!("{} k={k}: socket {field} differs", algo[1]));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{states} protocol states for 2 to 4 workers with no violations; {socket_runs} multi-process socket runs match memory digests, supersteps and message counts")
    } else {
        failures.join(", ")
    };
    verdict(failures.is_empty(), detail)
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut failures = Vec::new();
    let mut pairs = 0;
    for (name, model) in [("er", "erdos-renyi"), ("pa", "preferential-attachment")] {
        let store = cli_store(dir.path(), name, model, 4);
        for algo in ALGORITHMS {
            for mode in ["subgraph", "vertex-emulation"] {
                let extra = ["--seed", "7", "--mode", mode];
                let a = run_report(&store, algo, &extra);
                let b = run_report(&store, algo, &extra);
                pairs += 1;
                if a["digest"] != b["digest"] || a["supersteps"] != b["supersteps"] {
                    failures.push(format!("{} {mode} on {name}", algo[1]));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{pairs} repeated CLI runs with --seed 7 give identical digests and superstep counts")
    } else {
        format!("differences: {}", failures.join(", "))
    };
    verdict(failures.is_empty(), detail)
}

/// Ranking supersteps of BlockRank and tolerance-mode PageRank, and
/// BlockRank's distance from the converged oracle.
fn rank_race(g: &Graph, map: &PartitionMap, eps: f64) -> (u64, u64, f64) {
    let mut br = AlgorithmConfig::new(Algorithm::BlockRank);
    br.epsilon = eps;
    br.iterations = 1000;
    let block = run(&br, build_partitions(g, map));
    let mut pr = AlgorithmConfig::new(Algorithm::PageRank);
    pr.tolerance = Some(eps);
    pr.iterations = 1000;
    let classic = run(&pr, build_partitions(g, map));
    let (truth, _) = PowerIteration::default().converge(g, 1e-14, 10_000);
    (block.rank_supersteps(), classic.rank_supersteps(), oracle::linf(&reals(&block), &truth))
}

fn blockrank() -> Verdict {
    let eps = 1e-7;
    let shapes = [(5, 30, 60, 10), (4, 40, 40, 12), (8, 50, 150, 20)];
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut undirected = (0, 0);
    for &(blocks, size, extra, cross) in &shapes {
        for seed in 0..4 {
            for directed in [true, false] {
                let (g, assignment) = planted_blocks(blocks, size, extra, cross, directed, seed);
                let map = PartitionMap::from_assignment(&g, blocks, assignment).expect("planted map");
                let (b, c, d) = rank_race(&g, &map, eps);
                worst = worst.max(d);
                if d > 1e-6 {
                    failures.push(format!("{blocks}x{size} seed {seed}: error {d:e}"));
                }
                if !directed {
                    undirected.0 += usize::from(b <= c);
                    undirected.1 += 1;
                    continue;
                }
                rows.push(format!("{b}/{c}"));
                if b > c {
                    failures.push(format!("{blocks}x{size} seed {seed}: {b} vs {c} supersteps"));
                }
            }
        }
    }
    let mut detail = format!(
        "directed block fixtures, ranking supersteps blockrank/pagerank at epsilon {eps:e}: {}; max error vs converged oracle {worst:e}; undirected fixtures (not gating): blockrank no slower on {}/{}",
        rows.join(" "),
        undirected.0,
        undirected.1
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(", ")));
    }
    verdict(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut check = |name: &str, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {} [{:.1} s]", v.detail, t.elapsed().as_secs_f64());
        if !v.pass {
            failed += 1;
        }
    };
    check("figure max-vertex supersteps", &figure);
    check("oracle equivalence", &oracle_equivalence);
    let rows = compare_modes(&fixtures());
    check("superstep bound", &|| superstep_bound(&rows));
    check("message reduction", &|| message_reduction(&rows));
    check("storage integrity", &storage);
    check("protocol safety and socket transport", &protocol);
    check("determinism", &determinism);
    check("blockrank convergence", &blockrank);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
