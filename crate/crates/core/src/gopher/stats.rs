//! Execution statistics gathered by workers and merged by the driver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ids::{PartitionId, SubgraphId, VertexId};
use crate::model::Partition;
use crate::partition::build_meta_graph;

/// One worker's counters for one superstep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkerSuperstep {
    pub superstep: u64,
    /// Sub-graphs whose Compute ran.
    pub computed: usize,
    /// Envelopes produced (after fan-out).
    pub generated: u64,
    /// Envelopes sent to other partitions.
    pub remote: u64,
    /// Envelopes delivered within this partition.
    pub local: u64,
    pub wall_secs: f64,
}

/// A sent envelope, recorded at the sender when message logging is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LogEntry {
    pub superstep: u64,
    pub source: SubgraphId,
    pub dest: SubgraphId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerOutcome<V> {
    pub partition: PartitionId,
    pub values: Vec<(VertexId, V)>,
    pub supersteps: Vec<WorkerSuperstep>,
    pub subgraph_secs: Vec<(SubgraphId, f64)>,
    pub log: Vec<LogEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuperstepStats {
    pub superstep: u64,
    pub active_subgraphs: usize,
    pub messages: u64,
    pub remote_messages: u64,
    pub local_messages: u64,
    /// Wall time per partition, indexed by partition id.
    pub partition_wall_secs: Vec<f64>,
}

/// Size parameters of a run: meta-graph diameter `d`, vertices `v`, edges
/// `e`, partitions `p`, sub-graphs per partition `s`, pool width `c` and
/// average out-degree `g`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub d: usize,
    pub v: usize,
    pub e: usize,
    pub p: usize,
    pub s: Vec<usize>,
    pub c: usize,
    pub g: f64,
}

impl Diagnostics {
    pub fn from_partitions(partitions: &[Partition], directed: bool, pool_width: usize) -> Self {
        let v: usize = partitions.iter().map(Partition::num_vertices).sum();
        let mut arcs = 0usize;
        let mut loops = 0usize;
        for sg in partitions.iter().flat_map(|p| &p.subgraphs) {
            arcs += sg.num_local_arcs() + sg.num_remote_edges();
            loops += sg.local_edges().filter(|(a, b)| a == b).count();
        }
        let e = if directed { arcs } else { (arcs - loops) / 2 + loops };
        Diagnostics {
            d: build_meta_graph(partitions).diameter(),
            v,
            e,
            p: partitions.len(),
            s: partitions.iter().map(|p| p.subgraphs.len()).collect(),
            c: pool_width,
            g: if v == 0 { 0.0 } else { arcs as f64 / v as f64 },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionStats {
    /// Supersteps in which at least one Compute ran. The closing round in
    /// which every worker reports ready to halt is not counted.
    pub supersteps: u64,
    pub per_superstep: Vec<SuperstepStats>,
    pub subgraph_compute_secs: BTreeMap<SubgraphId, f64>,
    pub diagnostics: Diagnostics,
    pub message_log: Option<Vec<LogEntry>>,
}

impl ExecutionStats {
    pub fn total_messages(&self) -> u64 {
        self.per_superstep.iter().map(|s| s.messages).sum()
    }

    pub fn total_remote(&self) -> u64 {
        self.per_superstep.iter().map(|s| s.remote_messages).sum()
    }

    pub fn total_local(&self) -> u64 {
        self.per_superstep.iter().map(|s| s.local_messages).sum()
    }

    /// Combines per-worker outcomes, returning values sorted by vertex.
    pub fn merge<V>(
        supersteps: u64,
        outcomes: Vec<WorkerOutcome<V>>,
        diagnostics: Diagnostics,
        record_messages: bool,
    ) -> (Vec<(VertexId, V)>, ExecutionStats) {
        let k = outcomes.len();
        let mut per: Vec<SuperstepStats> = (1..=supersteps)
            .map(|t| SuperstepStats {
                superstep: t,
                partition_wall_secs: vec![0.0; k],
                ..Default::default()
            })
            .collect();
        let mut values = Vec::new();
        let mut compute = BTreeMap::new();
        let mut log = Vec::new();
        for o in outcomes {
            let p = o.partition.index();
            for w in o.supersteps {
                let Some(s) = w.superstep.checked_sub(1).and_then(|i| per.get_mut(i as usize)) else {
                    continue;
                };
                s.active_subgraphs += w.computed;
                s.messages += w.generated;
                s.remote_messages += w.remote;
                s.local_messages += w.local;
                if let Some(slot) = s.partition_wall_secs.get_mut(p) {
                    *slot = w.wall_secs;
                }
            }
            for (sg, secs) in o.subgraph_secs {
                *compute.entry(sg).or_insert(0.0) += secs;
            }
            values.extend(o.values);
            log.extend(o.log);
        }
        values.sort_by_key(|(v, _)| *v);
        log.sort();
        let stats = ExecutionStats {
            supersteps,
            per_superstep: per,
            subgraph_compute_secs: compute,
            diagnostics,
            message_log: record_messages.then_some(log),
        };
        (values, stats)
    }
}
