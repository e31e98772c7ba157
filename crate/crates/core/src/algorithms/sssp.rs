use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::attr::AttrValue;
use crate::graph::WEIGHT_ATTR;
use crate::gopher::{ComputeApp, ComputeError, Context, Envelope};
use crate::ids::{SubgraphId, VertexId};
use crate::model::Subgraph;

/// Single-source shortest paths: Dijkstra inside each sub-graph, relaxed
/// distances sent to remote vertices between supersteps. Unreachable
/// vertices keep `+inf`.
///
/// Gated mode (unit weights) sends a remote relaxation in superstep `t`
/// only when its source distance is at most `t - 1`. Any such tentative
/// distance is final: a shorter path would have been settled a superstep
/// earlier. Pending relaxations keep the sub-graph active.
#[derive(Debug, Clone, Copy)]
pub struct Sssp {
    source: VertexId,
    weighted: bool,
    gated: bool,
}

impl Sssp {
    pub fn new(source: VertexId, weighted: bool) -> Self {
        Sssp {
            source,
            weighted,
            gated: false,
        }
    }

    pub fn gated(mut self, on: bool) -> Self {
        self.gated = on;
        self
    }
}

#[derive(Debug)]
pub struct SsspState {
    dist: Vec<f64>,
    /// Local targets as vertex positions, parallel to the local arc slots.
    local_targets: Vec<usize>,
    /// Weight per edge slot (local arcs then remote edges).
    weights: Vec<f64>,
    /// Best distance already sent to each remote vertex.
    sent: HashMap<(SubgraphId, VertexId), f64>,
    /// Gated mode: best unsent distance per remote vertex.
    pending: BTreeMap<(SubgraphId, VertexId), f64>,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl Sssp {
    fn relax(&self, sg: &Subgraph, st: &mut SsspState, open: Vec<usize>) -> BTreeMap<(SubgraphId, VertexId), f64> {
        let mut heap: BinaryHeap<Item> = open.into_iter().map(|i| Item(st.dist[i], i)).collect();
        let mut done = vec![false; sg.num_vertices()];
        let mut remote: BTreeMap<(SubgraphId, VertexId), f64> = BTreeMap::new();
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] || d > st.dist[u] {
                continue;
            }
            done[u] = true;
            for slot in sg.local_edge_range(u) {
                let v = st.local_targets[slot];
                let nd = d + st.weights[slot];
                if nd < st.dist[v] {
                    st.dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
            for (slot, r) in sg.remote_edge_range(u).zip(sg.remote_neighbors(u)) {
                let nd = d + st.weights[slot];
                remote
                    .entry((r.subgraph, r.vertex))
                    .and_modify(|x| *x = x.min(nd))
                    .or_insert(nd);
            }
        }
        remote
    }
}

impl ComputeApp for Sssp {
    type Message = f64;
    type State = SsspState;
    type Value = f64;

    fn name(&self) -> &str {
        "sssp"
    }

    fn init(&self, sg: &Subgraph) -> Result<SsspState, ComputeError> {
        let n = sg.num_vertices();
        let mut local_targets = Vec::with_capacity(sg.num_local_arcs());
        for i in 0..n {
            for v in sg.local_neighbors(i) {
                local_targets.push(
                    sg.index_of(*v)
                        .ok_or_else(|| ComputeError(format!("local edge to non-member {v}")))?,
                );
            }
        }
        let slots = sg.num_edge_slots();
        let weights = match (self.weighted, sg.attribute(WEIGHT_ATTR)) {
            (true, Some(col)) => col
                .values()
                .iter()
                .map(|w| w.as_ref().and_then(AttrValue::as_f64).unwrap_or(1.0))
                .collect(),
            _ => vec![1.0; slots],
        };
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(ComputeError(format!("edge weight {w} is not a non-negative number")));
        }
        Ok(SsspState {
            dist: vec![f64::INFINITY; n],
            local_targets,
            weights,
            sent: HashMap::new(),
            pending: BTreeMap::new(),
        })
    }

    fn compute(
        &self,
        sg: &Subgraph,
        st: &mut SsspState,
        messages: &[Envelope<f64>],
        ctx: &mut Context<'_, f64>,
    ) -> Result<(), ComputeError> {
        let mut open = Vec::new();
        if ctx.superstep() == 1 {
            if let Some(i) = sg.index_of(self.source) {
                st.dist[i] = 0.0;
                open.push(i);
            }
        }
        for m in messages {
            let v = m
                .vertex()
                .ok_or_else(|| ComputeError("distance message without a target vertex".into()))?;
            let i = sg
                .index_of(v)
                .ok_or_else(|| ComputeError(format!("distance message for non-member {v}")))?;
            if st.dist[i] > m.payload {
                st.dist[i] = m.payload;
                open.push(i);
            }
        }
        for (key, d) in self.relax(sg, st, open) {
            // the target already holds a distance at least this good
            if st.sent.get(&key).is_some_and(|&old| old <= d) {
                continue;
            }
            st.pending.entry(key).and_modify(|x| *x = x.min(d)).or_insert(d);
        }
        // a message carries the source distance plus one
        let bound = if self.gated { ctx.superstep() as f64 } else { f64::INFINITY };
        let ready: Vec<_> = st.pending.iter().filter(|(_, &d)| d <= bound).map(|(k, d)| (*k, *d)).collect();
        for ((target_sg, v), d) in ready {
            st.pending.remove(&(target_sg, v));
            st.sent.insert((target_sg, v), d);
            ctx.send_to_subgraph_vertex(target_sg, v, d);
        }
        if st.pending.is_empty() {
            ctx.vote_to_halt();
        }
        Ok(())
    }

    fn values(&self, sg: &Subgraph, st: &SsspState) -> Vec<(VertexId, f64)> {
        sg.vertices().iter().copied().zip(st.dist.iter().copied()).collect()
    }
}
