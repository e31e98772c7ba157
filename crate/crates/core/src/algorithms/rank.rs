//! PageRank and BlockRank.
//!
//! Each round computes, for every vertex `v`,
//! `teleport / n + damping * (sum + dangling / n)`, where `sum` adds
//! `rank(u) / outdeg(u)` over in-neighbors `u` in ascending id order and
//! `dangling` adds the rank of every zero-out-degree vertex in ascending id
//! order (or is zero when redistribution is off). Fixing the summation
//! order makes results independent of partitioning and message arrival.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use super::AlgorithmConfig;
use crate::gopher::codec::{CodecError, Decoder, Encoder};
use crate::gopher::{ComputeApp, ComputeError, Context, Envelope, Payload};
use crate::ids::{SubgraphId, VertexId};
use crate::model::Subgraph;

/// Round cap for the within-block and block-level rankings of BlockRank.
const INNER_ROUND_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum RankMessage {
    /// `(target, source, rank(source) / outdeg(source))` for remote edges
    /// into the receiving sub-graph.
    Contributions(Vec<(VertexId, VertexId, f64)>),
    /// Ranks of the sender's zero-out-degree vertices.
    Dangling(Vec<(VertexId, f64)>),
    /// The sender's ranks moved by at least the tolerance this round.
    Unconverged,
    /// BlockRank: the sender block's outgoing block-to-block weights.
    BlockWeights(Vec<(SubgraphId, f64)>),
}

impl Payload for RankMessage {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            RankMessage::Contributions(list) => {
                enc.u8(0).u64(list.len() as u64);
                for (t, s, c) in list {
                    enc.vertex(*t).vertex(*s).f64(*c);
                }
            }
            RankMessage::Dangling(list) => {
                enc.u8(1);
                list.encode(enc);
            }
            RankMessage::Unconverged => {
                enc.u8(2);
            }
            RankMessage::BlockWeights(list) => {
                enc.u8(3).u64(list.len() as u64);
                for (b, w) in list {
                    enc.subgraph(*b).f64(*w);
                }
            }
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(match dec.u8()? {
            0 => {
                let n = dec.length_prefix()?;
                let list = (0..n)
                    .map(|_| Ok((dec.vertex()?, dec.vertex()?, dec.f64()?)))
                    .collect::<Result<_, CodecError>>()?;
                RankMessage::Contributions(list)
            }
            1 => RankMessage::Dangling(Vec::decode(dec)?),
            2 => RankMessage::Unconverged,
            3 => {
                let n = dec.length_prefix()?;
                let list = (0..n)
                    .map(|_| Ok((dec.subgraph()?, dec.f64()?)))
                    .collect::<Result<_, CodecError>>()?;
                RankMessage::BlockWeights(list)
            }
            other => {
                return Err(CodecError {
                    pos: 0,
                    reason: format!("unknown rank message kind {other}"),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Params {
    damping: f64,
    teleport: f64,
    redistribute: bool,
    tolerance: Option<f64>,
    cap: usize,
}

#[derive(Debug)]
pub struct RankState {
    rank: Vec<f64>,
    /// Out-degree counting local arcs and remote edges.
    outdeg: Vec<usize>,
    local_outdeg: Vec<usize>,
    /// Local in-neighbor positions per vertex, ascending.
    in_local: Vec<Vec<usize>>,
    /// BlockRank: within-block ranks from the first phase.
    local_rank: Vec<f64>,
}

fn init_state(sg: &Subgraph) -> Result<RankState, ComputeError> {
    let n = sg.num_vertices();
    let mut in_local = vec![Vec::new(); n];
    let mut local_outdeg = vec![0; n];
    for (u, slot) in in_local_pairs(sg)? {
        in_local[slot].push(u);
        local_outdeg[u] += 1;
    }
    for list in &mut in_local {
        list.sort_unstable();
    }
    Ok(RankState {
        rank: vec![0.0; n],
        outdeg: (0..n).map(|i| sg.out_degree(i)).collect(),
        local_outdeg,
        in_local,
        local_rank: Vec::new(),
    })
}

/// `(source position, target position)` for every local arc.
fn in_local_pairs(sg: &Subgraph) -> Result<Vec<(usize, usize)>, ComputeError> {
    let mut out = Vec::with_capacity(sg.num_local_arcs());
    for u in 0..sg.num_vertices() {
        for v in sg.local_neighbors(u) {
            let t = sg
                .index_of(*v)
                .ok_or_else(|| ComputeError(format!("local edge to non-member {v}")))?;
            out.push((u, t));
        }
    }
    Ok(out)
}

fn send_round(sg: &Subgraph, st: &RankState, ctx: &mut Context<'_, RankMessage>, p: &Params) {
    let mut per_dest: BTreeMap<SubgraphId, Vec<(VertexId, VertexId, f64)>> = BTreeMap::new();
    let mut dangling = Vec::new();
    for (u, &vid) in sg.vertices().iter().enumerate() {
        if st.outdeg[u] == 0 {
            dangling.push((vid, st.rank[u]));
            continue;
        }
        let share = st.rank[u] / st.outdeg[u] as f64;
        for r in sg.remote_neighbors(u) {
            per_dest.entry(r.subgraph).or_default().push((r.vertex, vid, share));
        }
    }
    for (dest, list) in per_dest {
        ctx.send_to_subgraph(dest, RankMessage::Contributions(list));
    }
    if p.redistribute && !dangling.is_empty() {
        ctx.send_to_all_subgraphs(RankMessage::Dangling(dangling));
    }
}

/// Applies one round from the previous ranks and incoming messages.
/// Returns the round's L∞ change and whether any sub-graph reported itself
/// unconverged in the previous round.
fn update(
    sg: &Subgraph,
    st: &mut RankState,
    messages: &[Envelope<RankMessage>],
    n: f64,
    p: &Params,
) -> Result<(f64, bool), ComputeError> {
    let mut incoming: Vec<Vec<(VertexId, f64)>> = vec![Vec::new(); sg.num_vertices()];
    let mut dangling: Vec<(VertexId, f64)> = Vec::new();
    let mut unconverged = false;
    for m in messages {
        match &m.payload {
            RankMessage::Contributions(list) => {
                for &(t, s, c) in list {
                    let i = sg
                        .index_of(t)
                        .ok_or_else(|| ComputeError(format!("contribution for non-member {t}")))?;
                    incoming[i].push((s, c));
                }
            }
            RankMessage::Dangling(list) => dangling.extend_from_slice(list),
            RankMessage::Unconverged => unconverged = true,
            RankMessage::BlockWeights(_) => {}
        }
    }
    let dangling_mass = if p.redistribute {
        dangling.sort_by_key(|d| d.0);
        dangling.iter().fold(0.0, |acc, d| acc + d.1)
    } else {
        0.0
    };
    let vertices = sg.vertices();
    let mut delta = 0.0f64;
    let mut next = Vec::with_capacity(st.rank.len());
    for (v, list) in incoming.iter_mut().enumerate() {
        for &u in &st.in_local[v] {
            list.push((vertices[u], st.rank[u] / st.outdeg[u] as f64));
        }
        list.sort_by_key(|x| x.0);
        let sum = list.iter().fold(0.0, |acc, x| acc + x.1);
        let r = p.teleport / n + p.damping * (sum + dangling_mass / n);
        delta = delta.max((r - st.rank[v]).abs());
        next.push(r);
    }
    st.rank = next;
    Ok((delta, unconverged))
}

/// Shared superstep body for the iterative phase. `round` is the 1-based
/// update round performed in this superstep.
fn iterate(
    sg: &Subgraph,
    st: &mut RankState,
    messages: &[Envelope<RankMessage>],
    ctx: &mut Context<'_, RankMessage>,
    p: &Params,
    round: usize,
) -> Result<(), ComputeError> {
    let n = ctx.graph().num_vertices() as f64;
    if let Some(tol) = p.tolerance {
        // every sub-graph sees the same flags, so all stop together
        let flagged = messages.iter().any(|m| m.payload == RankMessage::Unconverged);
        if round > 1 && !flagged {
            ctx.vote_to_halt();
            return Ok(());
        }
        let (delta, _) = update(sg, st, messages, n, p)?;
        if round >= p.cap {
            ctx.vote_to_halt();
            return Ok(());
        }
        send_round(sg, st, ctx, p);
        if delta >= tol {
            ctx.send_to_all_subgraphs(RankMessage::Unconverged);
        }
    } else {
        update(sg, st, messages, n, p)?;
        if round >= p.cap {
            ctx.vote_to_halt();
            return Ok(());
        }
        send_round(sg, st, ctx, p);
    }
    Ok(())
}

/// Classic PageRank: one update round per superstep from a uniform start.
#[derive(Debug, Clone)]
pub struct PageRank {
    params: Params,
}

impl PageRank {
    pub fn new(config: &AlgorithmConfig) -> Self {
        PageRank {
            params: Params {
                damping: config.damping,
                teleport: config.teleport,
                redistribute: config.redistribute_dangling,
                tolerance: config.tolerance,
                cap: config.iterations,
            },
        }
    }
}

impl ComputeApp for PageRank {
    type Message = RankMessage;
    type State = RankState;
    type Value = f64;

    fn name(&self) -> &str {
        "pagerank"
    }

    fn init(&self, sg: &Subgraph) -> Result<RankState, ComputeError> {
        init_state(sg)
    }

    fn compute(
        &self,
        sg: &Subgraph,
        st: &mut RankState,
        messages: &[Envelope<RankMessage>],
        ctx: &mut Context<'_, RankMessage>,
    ) -> Result<(), ComputeError> {
        let t = ctx.superstep() as usize;
        if t == 1 {
            let n = ctx.graph().num_vertices() as f64;
            st.rank.iter_mut().for_each(|r| *r = 1.0 / n);
            send_round(sg, st, ctx, &self.params);
            return Ok(());
        }
        iterate(sg, st, messages, ctx, &self.params, t - 1)
    }

    fn values(&self, sg: &Subgraph, st: &RankState) -> Vec<(VertexId, f64)> {
        sg.vertices().iter().copied().zip(st.rank.iter().copied()).collect()
    }
}

type BlockSummaries = Vec<(SubgraphId, Vec<(SubgraphId, f64)>)>;

/// BlockRank: within-block PageRank (superstep 1), PageRank over the block
/// graph (superstep 2) to seed vertex ranks with `local rank × block
/// rank`, then classic rounds until the L∞ change falls below `epsilon`.
#[derive(Debug)]
pub struct BlockRank {
    params: Params,
    epsilon: f64,
    /// Block ranks are identical for every sub-graph in a process; the
    /// first sub-graph to need them computes them for the rest.
    memo: Mutex<Option<(BlockSummaries, Arc<Vec<f64>>)>>,
}

impl BlockRank {
    pub fn new(config: &AlgorithmConfig) -> Self {
        BlockRank {
            params: Params {
                damping: config.damping,
                teleport: config.teleport,
                redistribute: config.redistribute_dangling,
                tolerance: Some(config.epsilon),
                cap: config.iterations,
            },
            epsilon: config.epsilon,
            memo: Mutex::new(None),
        }
    }

    fn local_pagerank(&self, st: &mut RankState) {
        let n = st.rank.len();
        let nb = n as f64;
        let p = &self.params;
        let mut l = vec![1.0 / nb; n];
        for _ in 0..INNER_ROUND_CAP {
            let dangling = (0..n).filter(|&u| st.local_outdeg[u] == 0).fold(0.0, |acc, u| acc + l[u]);
            let mut delta = 0.0f64;
            let next: Vec<f64> = (0..n)
                .map(|v| {
                    let sum = st.in_local[v]
                        .iter()
                        .fold(0.0, |acc, &u| acc + l[u] / st.local_outdeg[u] as f64);
                    let r = p.teleport / nb + p.damping * (sum + dangling / nb);
                    delta = delta.max((r - l[v]).abs());
                    r
                })
                .collect();
            l = next;
            if delta < self.epsilon {
                break;
            }
        }
        st.local_rank = l;
    }

    fn block_ranks(&self, blocks: &[SubgraphId], summaries: BlockSummaries) -> Arc<Vec<f64>> {
        let mut memo = self.memo.lock().expect("block rank memo");
        if let Some((key, ranks)) = memo.as_ref() {
            if *key == summaries {
                return ranks.clone();
            }
        }
        let nb = blocks.len();
        let pos = |b: SubgraphId| blocks.binary_search(&b).ok();
        // row-stochastic block transition: remote weights plus self weight
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
        for (a, w) in &summaries {
            let Some(ai) = pos(*a) else { continue };
            rows[ai] = w.iter().filter_map(|(b, x)| pos(*b).map(|bi| (bi, *x))).collect();
        }
        for (ai, row) in rows.iter_mut().enumerate() {
            let out: f64 = row.iter().map(|x| x.1).sum();
            row.push((ai, (1.0 - out).max(0.0)));
        }
        let p = &self.params;
        let n = nb as f64;
        let mut b = vec![1.0 / n; nb];
        for _ in 0..INNER_ROUND_CAP {
            let mut acc = vec![0.0; nb];
            for (ai, row) in rows.iter().enumerate() {
                for &(bi, w) in row {
                    acc[bi] += b[ai] * w;
                }
            }
            let next: Vec<f64> = acc.iter().map(|s| p.teleport / n + p.damping * s).collect();
            let delta = next.iter().zip(&b).fold(0.0f64, |d, (x, y)| d.max((x - y).abs()));
            b = next;
            if delta < self.epsilon {
                break;
            }
        }
        let total: f64 = b.iter().sum();
        let ranks = Arc::new(b.into_iter().map(|x| x / total).collect::<Vec<_>>());
        *memo = Some((summaries, ranks.clone()));
        ranks
    }
}

impl ComputeApp for BlockRank {
    type Message = RankMessage;
    type State = RankState;
    type Value = f64;

    fn name(&self) -> &str {
        "blockrank"
    }

    fn init(&self, sg: &Subgraph) -> Result<RankState, ComputeError> {
        init_state(sg)
    }

    fn compute(
        &self,
        sg: &Subgraph,
        st: &mut RankState,
        messages: &[Envelope<RankMessage>],
        ctx: &mut Context<'_, RankMessage>,
    ) -> Result<(), ComputeError> {
        match ctx.superstep() {
            1 => {
                self.local_pagerank(st);
                let mut weights: BTreeMap<SubgraphId, f64> = BTreeMap::new();
                for u in 0..sg.num_vertices() {
                    let share = st.local_rank[u] / st.outdeg[u].max(1) as f64;
                    for r in sg.remote_neighbors(u) {
                        *weights.entry(r.subgraph).or_insert(0.0) += share;
                    }
                }
                if !weights.is_empty() {
                    ctx.send_to_all_subgraphs(RankMessage::BlockWeights(weights.into_iter().collect()));
                }
                Ok(())
            }
            2 => {
                let mut summaries: BlockSummaries = messages
                    .iter()
                    .filter_map(|m| match &m.payload {
                        RankMessage::BlockWeights(w) => Some((m.source, w.clone())),
                        _ => None,
                    })
                    .collect();
                summaries.sort_by_key(|s| s.0);
                let blocks = ctx.graph().subgraphs();
                let ranks = self.block_ranks(blocks, summaries);
                let own = blocks
                    .binary_search(&sg.id())
                    .map_err(|_| ComputeError(format!("{} missing from graph view", sg.id())))?;
                let b = ranks[own];
                st.rank = st.local_rank.iter().map(|l| l * b).collect();
                send_round(sg, st, ctx, &self.params);
                Ok(())
            }
            t => iterate(sg, st, messages, ctx, &self.params, t as usize - 2),
        }
    }

    fn values(&self, sg: &Subgraph, st: &RankState) -> Vec<(VertexId, f64)> {
        sg.vertices().iter().copied().zip(st.rank.iter().copied()).collect()
    }
}
