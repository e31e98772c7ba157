//! Sub-graph-centric algorithms and the vertex-centric emulation layout.

mod emulation;
mod max_vertex;
mod cc;
mod rank;
mod sssp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gopher::engine::run_socket_worker;
use crate::gopher::{self, ComputeApp, Diagnostics, EngineConfig, EngineError, ExecutionStats, WorkerOutcome};
use crate::ids::PartitionId;
use crate::ids::VertexId;
use crate::model::{Partition, Subgraph};

pub use cc::ConnectedComponents;
pub use emulation::{emulate_partitions, vertex_centric_emulation};
pub use max_vertex::MaxVertex;
pub use rank::{BlockRank, PageRank, RankMessage};
pub use sssp::Sssp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MaxVertex,
    ConnectedComponents,
    Sssp,
    #[serde(rename = "pagerank")]
    PageRank,
    #[serde(rename = "blockrank")]
    BlockRank,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::MaxVertex,
        Algorithm::ConnectedComponents,
        Algorithm::Sssp,
        Algorithm::PageRank,
        Algorithm::BlockRank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::MaxVertex => "max-vertex",
            Algorithm::ConnectedComponents => "connected-components",
            Algorithm::Sssp => "sssp",
            Algorithm::PageRank => "pagerank",
            Algorithm::BlockRank => "blockrank",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = AlgorithmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let a = match s {
            "max-vertex" | "max" => Algorithm::MaxVertex,
            "connected-components" | "cc" => Algorithm::ConnectedComponents,
            "sssp" => Algorithm::Sssp,
            "pagerank" => Algorithm::PageRank,
            "blockrank" => Algorithm::BlockRank,
            other => return Err(AlgorithmError::Config(format!("unknown algorithm {other:?}"))),
        };
        Ok(a)
    }
}

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("configuration error: source vertex {0} not found in graph")]
    SourceNotFound(VertexId),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("malformed value `{value}` for vertex {vertex} in a worker outcome")]
    Decode { vertex: VertexId, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    /// SSSP source.
    pub source: Option<VertexId>,
    /// SSSP: use the `weight` edge attribute instead of unit weights.
    pub weighted: bool,
    /// PageRank update rounds; also the round cap in tolerance mode.
    pub iterations: usize,
    pub damping: f64,
    pub teleport: f64,
    /// BlockRank convergence threshold for the local, block and global phases.
    pub epsilon: f64,
    /// PageRank: stop once the per-superstep L∞ change drops below this
    /// instead of running exactly `iterations` rounds.
    pub tolerance: Option<f64>,
    /// Spread dangling-vertex rank uniformly each round. Disabled, rank mass
    /// leaks exactly as in the bare update formula.
    pub redistribute_dangling: bool,
    /// SSSP, unit weights only: hold each remote relaxation until its
    /// distance is provably final, so every remote target hears at most
    /// once from each sub-graph. Trades supersteps for messages.
    #[serde(default)]
    pub frontier_gated: bool,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        AlgorithmConfig {
            algorithm,
            source: None,
            weighted: false,
            iterations: 30,
            damping: 0.85,
            teleport: 0.15,
            epsilon: 1e-6,
            tolerance: None,
            redistribute_dangling: true,
            frontier_gated: false,
        }
    }

    pub fn with_source(mut self, v: VertexId) -> Self {
        self.source = Some(v);
        self
    }

    pub fn check(&self) -> Result<(), AlgorithmError> {
        let bad = |m: &str| Err(AlgorithmError::Config(m.to_string()));
        if (self.damping + self.teleport - 1.0).abs() > 1e-12 {
            return bad("damping and teleport must sum to 1");
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return bad("damping must lie in [0, 1]");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 || self.tolerance.is_some_and(|t| t.is_nan() || t <= 0.0) {
            return bad("convergence thresholds must be positive");
        }
        if self.algorithm == Algorithm::Sssp && self.source.is_none() {
            return bad("sssp needs a source vertex");
        }
        if self.frontier_gated && self.weighted {
            return bad("frontier gating needs unit weights");
        }
        Ok(())
    }
}

/// Final per-vertex results, sorted by vertex id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexValues {
    Labels(Vec<(VertexId, u64)>),
    Reals(Vec<(VertexId, f64)>),
}

impl VertexValues {
    pub fn len(&self) -> usize {
        match self {
            VertexValues::Labels(v) => v.len(),
            VertexValues::Reals(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reals(&self) -> Option<&[(VertexId, f64)]> {
        match self {
            VertexValues::Reals(v) => Some(v),
            VertexValues::Labels(_) => None,
        }
    }

    pub fn labels(&self) -> Option<&[(VertexId, u64)]> {
        match self {
            VertexValues::Labels(v) => Some(v),
            VertexValues::Reals(_) => None,
        }
    }

    /// One `vertex<TAB>value` line per vertex. Reals use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            VertexValues::Labels(v) => {
                for (id, x) in v {
                    out.push_str(&format!("{}\t{x}\n", id.0));
                }
            }
            VertexValues::Reals(v) => {
                for (id, x) in v {
                    out.push_str(&format!("{}\t{}\n", id.0, format_real(*x)));
                }
            }
        }
        out
    }
}

pub fn format_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:?}")
    }
}

#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub values: VertexValues,
    pub stats: ExecutionStats,
}

impl AlgorithmRun {
    /// Supersteps after the set-up phase of a PageRank-family run: one
    /// set-up superstep for PageRank, two (local and block ranking) for
    /// BlockRank.
    pub fn rank_supersteps(&self) -> u64 {
        let setup = match self.algorithm {
            Algorithm::BlockRank => 2,
            _ => 1,
        };
        self.stats.supersteps.saturating_sub(setup)
    }
}

fn source_exists(partitions: &[Partition], v: VertexId) -> bool {
    partitions.iter().flat_map(|p| &p.subgraphs).any(|s| s.contains(v))
}

pub(crate) type Executed<V> = (Vec<(VertexId, V)>, ExecutionStats);

pub(crate) fn execute<A: ComputeApp>(
    app: &A,
    partitions: Vec<Partition>,
    engine: &EngineConfig,
) -> Result<Executed<A::Value>, AlgorithmError> {
    let out = gopher::run(app, partitions, engine)?;
    Ok((out.values, out.stats))
}

/// Runs the configured algorithm on already-built partitions.
pub fn run_algorithm(
    config: &AlgorithmConfig,
    partitions: Vec<Partition>,
    engine: &EngineConfig,
) -> Result<AlgorithmRun, AlgorithmError> {
    config.check()?;
    let (values, stats) = match config.algorithm {
        Algorithm::MaxVertex => {
            let (v, s) = execute(&MaxVertex, partitions, engine)?;
            (VertexValues::Reals(v), s)
        }
        Algorithm::ConnectedComponents => {
            let (v, s) = execute(&ConnectedComponents, partitions, engine)?;
            (VertexValues::Labels(v), s)
        }
        Algorithm::Sssp => {
            let (v, s) = execute(&sssp_app(config, &partitions)?, partitions, engine)?;
            (VertexValues::Reals(v), s)
        }
        Algorithm::PageRank => {
            let (v, s) = execute(&PageRank::new(config), partitions, engine)?;
            (VertexValues::Reals(v), s)
        }
        Algorithm::BlockRank => {
            let (v, s) = execute(&BlockRank::new(config), partitions, engine)?;
            (VertexValues::Reals(v), s)
        }
    };
    Ok(AlgorithmRun {
        algorithm: config.algorithm,
        values,
        stats,
    })
}

fn sssp_app(config: &AlgorithmConfig, partitions: &[Partition]) -> Result<Sssp, AlgorithmError> {
    let source = config
        .source
        .ok_or_else(|| AlgorithmError::Config("sssp needs a source vertex".into()))?;
    if !source_exists(partitions, source) {
        return Err(AlgorithmError::SourceNotFound(source));
    }
    Ok(Sssp::new(source, config.weighted).gated(config.frontier_gated))
}

fn stringify<V>(o: WorkerOutcome<V>, f: impl Fn(&V) -> String) -> WorkerOutcome<String> {
    WorkerOutcome {
        partition: o.partition,
        values: o.values.iter().map(|(v, x)| (*v, f(x))).collect(),
        supersteps: o.supersteps,
        subgraph_secs: o.subgraph_secs,
        log: o.log,
    }
}

/// Runs partition `me` of the configured algorithm as an out-of-process
/// socket worker. Values are returned in their text form so the outcome
/// survives any serialization, infinities included.
pub fn run_partition_worker(
    config: &AlgorithmConfig,
    partitions: Vec<Partition>,
    me: PartitionId,
    engine: &EngineConfig,
) -> Result<WorkerOutcome<String>, AlgorithmError> {
    config.check()?;
    let real = |x: &f64| format_real(*x);
    Ok(match config.algorithm {
        Algorithm::MaxVertex => stringify(run_socket_worker(&MaxVertex, partitions, me, engine)?, real),
        Algorithm::ConnectedComponents => {
            stringify(run_socket_worker(&ConnectedComponents, partitions, me, engine)?, u64::to_string)
        }
        Algorithm::Sssp => {
            let app = sssp_app(config, &partitions)?;
            stringify(run_socket_worker(&app, partitions, me, engine)?, real)
        }
        Algorithm::PageRank => stringify(run_socket_worker(&PageRank::new(config), partitions, me, engine)?, real),
        Algorithm::BlockRank => stringify(run_socket_worker(&BlockRank::new(config), partitions, me, engine)?, real),
    })
}

/// Combines the outcomes of [`run_partition_worker`] processes.
pub fn merge_partition_outcomes(
    algorithm: Algorithm,
    supersteps: u64,
    outcomes: Vec<WorkerOutcome<String>>,
    diagnostics: Diagnostics,
    record_messages: bool,
) -> Result<AlgorithmRun, AlgorithmError> {
    let (text, stats) = ExecutionStats::merge(supersteps, outcomes, diagnostics, record_messages);
    fn parse<T: FromStr>(text: Vec<(VertexId, String)>) -> Result<Vec<(VertexId, T)>, AlgorithmError> {
        text.into_iter()
            .map(|(vertex, value)| match value.parse() {
                Ok(x) => Ok((vertex, x)),
                Err(_) => Err(AlgorithmError::Decode { vertex, value }),
            })
            .collect()
    }
    let values = match algorithm {
        Algorithm::ConnectedComponents => VertexValues::Labels(parse(text)?),
        _ => VertexValues::Reals(parse(text)?),
    };
    Ok(AlgorithmRun {
        algorithm,
        values,
        stats,
    })
}

/// Sends to every neighboring sub-graph ignoring edge direction. On
/// undirected graphs this is exactly `send_to_all_subgraph_neighbors`.
pub(crate) fn send_to_undirected_neighbors<M: Clone>(sg: &Subgraph, ctx: &mut gopher::Context<'_, M>, msg: M) {
    if sg.is_directed() {
        for n in sg.undirected_subgraph_neighbors() {
            ctx.send_to_subgraph(n, msg.clone());
        }
    } else {
        ctx.send_to_all_subgraph_neighbors(msg);
    }
}
