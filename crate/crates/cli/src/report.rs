use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};
use subgraph_core::algorithms::{Algorithm, AlgorithmRun, VertexValues};
use subgraph_core::gopher::{Diagnostics, ExecutionStats};

/// sha256 of the `vertex<TAB>value` dump.
pub fn digest(values: &VertexValues) -> String {
    hex::encode(Sha256::digest(values.to_text().as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(xs: &[f64]) -> Spread {
        Spread {
            mean: xs.iter().sum::<f64>() / xs.len().max(1) as f64,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub runs: usize,
    pub load_secs: Spread,
    pub compute_secs: Spread,
}

#[derive(Debug, Clone, Serialize)]
pub struct MessageTotals {
    pub total: u64,
    pub remote: u64,
    pub local: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperstepRow {
    pub superstep: u64,
    pub active_subgraphs: usize,
    pub messages: u64,
    pub remote_messages: u64,
    pub partition_wall_secs: Vec<f64>,
}

/// Algorithm-specific digest of the final values.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ResultSummary {
    pub vertices: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reachable: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_sum: Option<f64>,
}

impl ResultSummary {
    pub fn of(algorithm: Algorithm, values: &VertexValues) -> ResultSummary {
        let mut s = ResultSummary {
            vertices: values.len(),
            ..Default::default()
        };
        match (algorithm, values) {
            (_, VertexValues::Labels(v)) => {
                s.components = Some(v.iter().map(|x| x.1).collect::<BTreeSet<_>>().len());
            }
            (Algorithm::Sssp, VertexValues::Reals(v)) => {
                s.reachable = Some(v.iter().filter(|x| x.1.is_finite()).count());
            }
            (Algorithm::MaxVertex, VertexValues::Reals(v)) => {
                s.max_value = v.iter().map(|x| x.1).reduce(f64::max);
            }
            (_, VertexValues::Reals(v)) => {
                s.rank_sum = Some(v.iter().map(|x| x.1).sum());
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub graph: String,
    pub k: usize,
    pub mode: String,
    pub transport: String,
    pub seed: u64,
    pub supersteps: u64,
    /// PageRank-family supersteps after set-up.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_supersteps: Option<u64>,
    pub messages: MessageTotals,
    pub per_superstep: Vec<SuperstepRow>,
    pub load_secs: f64,
    pub compute_secs: f64,
    pub timing: Timing,
    pub digest: String,
    pub summary: ResultSummary,
    pub diagnostics: Diagnostics,
}

pub struct ReportInputs<'a> {
    pub graph: &'a str,
    pub k: usize,
    pub mode: &'a str,
    pub transport: &'a str,
    pub seed: u64,
    pub load: &'a [f64],
    pub compute: &'a [f64],
}

fn rows(stats: &ExecutionStats) -> Vec<SuperstepRow> {
    stats
        .per_superstep
        .iter()
        .map(|s| SuperstepRow {
            superstep: s.superstep,
            active_subgraphs: s.active_subgraphs,
            messages: s.messages,
            remote_messages: s.remote_messages,
            partition_wall_secs: s.partition_wall_secs.clone(),
        })
        .collect()
}

impl RunReport {
    pub fn new(run: &AlgorithmRun, inputs: ReportInputs<'_>) -> RunReport {
        let stats = &run.stats;
        let rank = matches!(run.algorithm, Algorithm::PageRank | Algorithm::BlockRank);
        RunReport {
            algorithm: run.algorithm,
            graph: inputs.graph.to_string(),
            k: inputs.k,
            mode: inputs.mode.to_string(),
            transport: inputs.transport.to_string(),
            seed: inputs.seed,
            supersteps: stats.supersteps,
            rank_supersteps: rank.then(|| run.rank_supersteps()),
            messages: MessageTotals {
                total: stats.total_messages(),
                remote: stats.total_remote(),
                local: stats.total_local(),
            },
            per_superstep: rows(stats),
            load_secs: Spread::of(inputs.load).mean,
            compute_secs: Spread::of(inputs.compute).mean,
            timing: Timing {
                runs: inputs.compute.len(),
                load_secs: Spread::of(inputs.load),
                compute_secs: Spread::of(inputs.compute),
            },
            digest: digest(&run.values),
            summary: ResultSummary::of(run.algorithm, &run.values),
            diagnostics: stats.diagnostics.clone(),
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "algorithm    {}", self.algorithm);
        let _ = writeln!(out, "graph        {} (k = {}, {} mode, {})", self.graph, self.k, self.mode, self.transport);
        let _ = writeln!(out, "supersteps   {}", self.supersteps);
        let _ = writeln!(
            out,
            "messages     {} total, {} remote, {} local",
            self.messages.total, self.messages.remote, self.messages.local
        );
        let _ = writeln!(
            out,
            "load         {:.6} s (min {:.6}, max {:.6})",
            self.timing.load_secs.mean, self.timing.load_secs.min, self.timing.load_secs.max
        );
        let _ = writeln!(
            out,
            "compute      {:.6} s (min {:.6}, max {:.6}) over {} run(s)",
            self.timing.compute_secs.mean, self.timing.compute_secs.min, self.timing.compute_secs.max, self.timing.runs
        );
        let _ = writeln!(out, "digest       {}", self.digest);
        let s = &self.summary;
        let _ = writeln!(out, "vertices     {}", s.vertices);
        if let Some(c) = s.components {
            let _ = writeln!(out, "components   {c}");
        }
        if let Some(r) = s.reachable {
            let _ = writeln!(out, "reachable    {r}");
        }
        if let Some(m) = s.max_value {
            let _ = writeln!(out, "max value    {m}");
        }
        if let Some(r) = s.rank_sum {
            let _ = writeln!(out, "rank sum     {r}");
        }
        let _ = writeln!(out, "\n{:>9} {:>8} {:>10} {:>10}", "superstep", "active", "messages", "remote");
        for r in &self.per_superstep {
            let _ = writeln!(
                out,
                "{:>9} {:>8} {:>10} {:>10}",
                r.superstep, r.active_subgraphs, r.messages, r.remote_messages
            );
        }
        out
    }
}
