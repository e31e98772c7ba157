use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use log::{info, warn};
use serde_json::json;
use subgraph_core::algorithms::{emulate_partitions, run_algorithm, Algorithm, AlgorithmConfig, AlgorithmRun, VertexValues};
use subgraph_core::edgelist::{parse_edge_list, parse_vertex_table};
use subgraph_core::generate::{self, Model, Spec};
use subgraph_core::gofs::{write_store, GraphInfo, GraphStore};
use subgraph_core::gopher::{EngineConfig, MessageOrder, TransportKind};
use subgraph_core::graph::{Graph, VALUE_ATTR, WEIGHT_ATTR};
use subgraph_core::model::Partition;
use subgraph_core::oracle::{self, PowerIteration};
use subgraph_core::partition::{build_meta_graph, build_partitions, graph_from_partitions, partition_graph, skew_report, Strategy};
use subgraph_core::VertexId;

use crate::report::{digest, ReportInputs, RunReport};
use crate::{AlgoArgs, GenerateArgs, GraphModel, IngestArgs, InspectArgs, Mode, OracleArgs, Order, RunArgs, Transport};

pub const ID_MAP_FILE: &str = "id_map.tsv";

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    Ok(match s {
        "hash" => Strategy::Hash,
        "balanced" => Strategy::default(),
        _ => {
            if let Some(slack) = s.strip_prefix("balanced:") {
                let slack: f64 = slack.parse().with_context(|| format!("bad slack in strategy {s:?}"))?;
                Strategy::BalancedGreedy { slack }
            } else if let Some(path) = s.strip_prefix("file:") {
                Strategy::Imported(PathBuf::from(path))
            } else {
                bail!("unknown strategy {s:?}; expected hash, balanced, balanced:<slack> or file:<path>")
            }
        }
    })
}

pub fn algorithm_config(a: &AlgoArgs) -> Result<AlgorithmConfig> {
    let algorithm: Algorithm = a.algorithm.parse()?;
    let mut cfg = AlgorithmConfig::new(algorithm);
    cfg.source = a.source.map(VertexId);
    cfg.weighted = a.weighted;
    if let Some(n) = a.iterations {
        cfg.iterations = n;
    }
    if let Some(e) = a.epsilon {
        cfg.epsilon = e;
    }
    cfg.tolerance = a.tolerance;
    cfg.redistribute_dangling = !a.no_redistribute;
    cfg.frontier_gated = a.frontier_gated;
    cfg.check()?;
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    if a.k == 0 {
        bail!("partition count must be at least 1");
    }
    let strategy = parse_strategy(&a.strategy)?;
    let mut list = parse_edge_list(&read(&a.edges)?, a.directed).with_context(|| format!("parsing {}", a.edges.display()))?;
    if list.duplicates > 0 {
        warn!("collapsed {} duplicate edges", list.duplicates);
    }
    if let Some(path) = &a.vertex_attrs {
        for col in parse_vertex_table(&read(path)?, &list).with_context(|| format!("parsing {}", path.display()))? {
            list.graph.set_vertex_attr(col)?;
        }
    }
    let name = match &a.name {
        Some(n) => n.clone(),
        None => a.edges.file_stem().map_or("graph".into(), |s| s.to_string_lossy().into_owned()),
    };
    let graph = &mut list.graph;
    graph.set_name(name);
    let map = partition_graph(graph, a.k, &strategy)?;
    for w in map.warnings() {
        warn!("{w}");
    }
    let parts = build_partitions(graph, &map);
    let schema = graph.schema();
    let info = GraphInfo {
        name: graph.name(),
        directed: graph.is_directed(),
        k: a.k,
        schema: &schema,
    };
    let manifests = write_store(&a.out, &info, &parts)?;
    fs::write(a.out.join(ID_MAP_FILE), list.id_map_text()).context("writing the id map")?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{}: {} vertices, {} edges, {} duplicates collapsed, edge cut {}",
        list.graph.name(),
        list.graph.num_vertices(),
        list.graph.num_edges(),
        list.duplicates,
        map.edge_cut()
    );
    for (s, m) in skew_report(&parts).iter().zip(&manifests) {
        let _ = writeln!(
            text,
            "{}: {} vertices in {} sub-graphs (sizes {}..{}, mean {:.2}), {} bytes",
            s.partition,
            s.vertices,
            s.subgraphs,
            s.min_size,
            s.max_size,
            s.mean_size,
            m.total_bytes()
        );
    }
    emit(&text)
}

/// Attribute slices an algorithm reads, limited to those the store has.
pub fn wanted_attributes(store: &GraphStore, cfg: &AlgorithmConfig) -> Vec<&'static str> {
    let mut out = Vec::new();
    if cfg.weighted && store.schema().get(WEIGHT_ATTR).is_some() {
        out.push(WEIGHT_ATTR);
    }
    if cfg.algorithm == Algorithm::MaxVertex && store.schema().get(VALUE_ATTR).is_some() {
        out.push(VALUE_ATTR);
    }
    out
}

/// Loads the store and applies the layout for `mode`.
pub fn load(store: &GraphStore, cfg: &AlgorithmConfig, mode: Mode) -> Result<Vec<Partition>> {
    let parts = store.load(&wanted_attributes(store, cfg))?;
    Ok(match mode {
        Mode::Subgraph => parts,
        Mode::VertexEmulation => emulate_partitions(&parts)?,
    })
}

fn engine_config(a: &RunArgs) -> Result<EngineConfig> {
    let mut cfg = match &a.config {
        Some(path) => EngineConfig::from_file(path)?,
        None => EngineConfig::default(),
    };
    match a.transport {
        Some(Transport::Memory) => cfg.transport = TransportKind::Memory,
        Some(Transport::Socket) => cfg.transport = TransportKind::Socket,
        None => {}
    }
    match a.order {
        Some(Order::Deterministic) => cfg.message_order = MessageOrder::Deterministic,
        Some(Order::Arrival) => cfg.message_order = MessageOrder::Arrival,
        None => {}
    }
    if let Some(t) = a.threads {
        cfg.pool_width = t;
    }
    cfg.check()?;
    Ok(cfg)
}

pub fn run(a: &RunArgs) -> Result<()> {
    if a.repeat == 0 {
        bail!("--repeat must be at least 1");
    }
    let algo = algorithm_config(&a.algo)?;
    let engine = engine_config(a)?;
    let mut loads = Vec::new();
    let mut computes = Vec::new();
    let mut first: Option<(AlgorithmRun, usize, String)> = None;
    for i in 0..a.repeat {
        let t0 = Instant::now();
        let store = GraphStore::open(&a.store).with_context(|| format!("opening store {}", a.store.display()))?;
        let parts = load(&store, &algo, a.mode)?;
        loads.push(t0.elapsed().as_secs_f64());
        let k = parts.len();

        let t1 = Instant::now();
        let run = match engine.transport {
            TransportKind::Memory => run_algorithm(&algo, parts, &engine)?,
            TransportKind::Socket => crate::socket::run_processes(&a.store, &algo, a.mode, parts, &engine)?,
        };
        computes.push(t1.elapsed().as_secs_f64());
        info!("run {} of {}: {} supersteps", i + 1, a.repeat, run.stats.supersteps);
        match &first {
            None => first = Some((run, k, store.graph_name().to_string())),
            Some((prev, ..)) => {
                if prev.values != run.values || prev.stats.supersteps != run.stats.supersteps {
                    warn!("run {} differs from the first run", i + 1);
                }
            }
        }
    }
    let (run, k, graph) = first.expect("at least one run");
    if let Some(path) = &a.output {
        fs::write(path, run.values.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    let transport = engine.transport.to_string();
    let report = RunReport::new(
        &run,
        ReportInputs {
            graph: &graph,
            k,
            mode: a.mode.as_str(),
            transport: &transport,
            seed: a.seed,
            load: &loads,
            compute: &computes,
        },
    );
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &a.report {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if a.summary {
        emit(&report.table())?;
    } else if a.report.is_none() {
        emit(&format!("{text}\n"))?;
    }
    Ok(())
}

fn oracle_graph(a: &OracleArgs) -> Result<Graph> {
    if a.input.is_dir() {
        let store = GraphStore::open(&a.input)?;
        let names: Vec<String> = store.schema().iter().map(|d| d.name.clone()).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(graph_from_partitions(&store.load(&names)?)?)
    } else {
        Ok(parse_edge_list(&read(&a.input)?, a.directed)?.graph)
    }
}

pub fn oracle(a: &OracleArgs) -> Result<()> {
    let cfg = algorithm_config(&a.algo)?;
    let graph = oracle_graph(a)?;
    let values = reference(&graph, &cfg)?;
    let text = if a.digest {
        format!("{}\n", digest(&values))
    } else {
        values.to_text()
    };
    match &a.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => emit(&text)?,
    }
    Ok(())
}

/// Single-machine reference values in the same shape as a run.
pub fn reference(graph: &Graph, cfg: &AlgorithmConfig) -> Result<VertexValues> {
    let power = PowerIteration {
        damping: cfg.damping,
        teleport: cfg.teleport,
        redistribute_dangling: cfg.redistribute_dangling,
    };
    let with_ids = |ranks: Vec<f64>| VertexValues::Reals(graph.vertices().zip(ranks).collect());
    Ok(match cfg.algorithm {
        Algorithm::ConnectedComponents => VertexValues::Labels(oracle::cc_labels(graph)),
        Algorithm::MaxVertex => VertexValues::Reals(oracle::max_vertex(graph)),
        Algorithm::Sssp => {
            let source = cfg.source.context("sssp needs --source")?;
            if source.index() >= graph.num_vertices() {
                bail!("source vertex {source} not found in graph");
            }
            VertexValues::Reals(oracle::sssp(graph, source, cfg.weighted))
        }
        Algorithm::PageRank => match cfg.tolerance {
            Some(tol) => with_ids(power.converge(graph, tol, cfg.iterations).0),
            None => with_ids(power.run(graph, cfg.iterations)),
        },
        Algorithm::BlockRank => with_ids(power.converge(graph, cfg.epsilon, cfg.iterations).0),
    })
}

pub fn inspect(a: &InspectArgs) -> Result<()> {
    let store = GraphStore::open(&a.store)?;
    let parts = store.load(&[])?;
    let meta = build_meta_graph(&parts);
    let partitions: Vec<_> = store
        .partitions()
        .iter()
        .zip(skew_report(&parts))
        .map(|(p, skew)| {
            let m = p.metadata();
            json!({
                "partition": m.partition,
                "vertices": skew.vertices,
                "subgraphs": m.subgraphs,
                "subgraph_sizes": { "min": skew.min_size, "max": skew.max_size, "mean": skew.mean_size },
                "files": m.files.len(),
                "bytes": m.files.iter().map(|f| f.bytes).sum::<u64>(),
            })
        })
        .collect();
    let out = json!({
        "graph": store.graph_name(),
        "directed": store.directed(),
        "k": parts.len(),
        "schema": store.schema(),
        "format_version": store.partitions()[0].metadata().format_version,
        "graph_id": store.partitions()[0].metadata().graph_id,
        "meta_graph": {
            "subgraphs": meta.num_vertices(),
            "edges": meta.num_edges(),
            "components": meta.components().len(),
            "diameter": meta.diameter(),
        },
        "partitions": partitions,
    });
    emit(&format!("{}\n", serde_json::to_string_pretty(&out)?))
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let model = match a.model {
        GraphModel::ErdosRenyi => Model::ErdosRenyi { edges: a.edges },
        GraphModel::PreferentialAttachment => Model::PreferentialAttachment { per_vertex: a.edges },
    };
    let g = generate::generate(&Spec {
        vertices: a.vertices,
        model,
        directed: a.directed,
        weighted: a.weighted,
        values: false,
        seed: a.seed,
    });
    fs::write(&a.output, edge_list_text(&g)).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

/// One line per edge; undirected edges are written once.
pub fn edge_list_text(g: &Graph) -> String {
    let weighted = g.edge_attr(WEIGHT_ATTR).is_some();
    let mut out = format!("# {} vertices, directed: {}\n", g.num_vertices(), g.is_directed());
    for u in g.vertices() {
        for (arc, v) in g.edge_range(u).zip(g.out_neighbors(u)) {
            if !g.is_directed() && v.0 < u.0 {
                continue;
            }
            if weighted {
                let _ = writeln!(out, "{} {} {}", u.0, v.0, g.arc_weight(arc));
            } else {
                let _ = writeln!(out, "{} {}", u.0, v.0);
            }
        }
    }
    out
}
