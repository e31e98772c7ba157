//! The user contract: `Compute(Subgraph, messages)` plus messaging and
//! halting through a [`Context`].

use std::fmt::Debug;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use super::codec::{CodecError, Decoder, Encoder, Payload};
use crate::ids::{SubgraphId, VertexId};
use crate::model::Subgraph;

/// Error raised from inside a Compute call.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{0}")]
pub struct ComputeError(pub String);

/// Addressing mode a message was sent with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    AllNeighbors,
    Subgraph(SubgraphId),
    SubgraphVertex(SubgraphId, VertexId),
    Broadcast,
}

impl Target {
    fn encode(&self, enc: &mut Encoder) {
        match *self {
            Target::AllNeighbors => {
                enc.u8(0);
            }
            Target::Subgraph(s) => {
                enc.u8(1).subgraph(s);
            }
            Target::SubgraphVertex(s, v) => {
                enc.u8(2).subgraph(s).vertex(v);
            }
            Target::Broadcast => {
                enc.u8(3);
            }
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(match dec.u8()? {
            0 => Target::AllNeighbors,
            1 => Target::Subgraph(dec.subgraph()?),
            2 => Target::SubgraphVertex(dec.subgraph()?, dec.vertex()?),
            3 => Target::Broadcast,
            other => {
                return Err(CodecError {
                    pos: 0,
                    reason: format!("unknown target kind {other}"),
                })
            }
        })
    }
}

/// One delivered copy of a message.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<M> {
    pub source: SubgraphId,
    /// Superstep in which the message was sent.
    pub superstep: u64,
    /// Per-source, per-superstep counter.
    pub sequence: u64,
    pub target: Target,
    pub payload: M,
}

impl<M> Envelope<M> {
    /// Vertex id carried by vertex-addressed messages.
    pub fn vertex(&self) -> Option<VertexId> {
        match self.target {
            Target::SubgraphVertex(_, v) => Some(v),
            _ => None,
        }
    }
}

impl<M: Payload> Envelope<M> {
    pub fn encode(&self, enc: &mut Encoder) {
        enc.subgraph(self.source).u64(self.superstep).u64(self.sequence);
        self.target.encode(enc);
        self.payload.encode(enc);
    }

    pub fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Envelope {
            source: dec.subgraph()?,
            superstep: dec.u64()?,
            sequence: dec.u64()?,
            target: Target::decode(dec)?,
            payload: M::decode(dec)?,
        })
    }
}

/// Graph-wide facts every Compute call may consult.
#[derive(Debug, Clone)]
pub struct GraphView {
    subgraphs: Arc<Vec<SubgraphId>>,
    num_vertices: u64,
}

impl GraphView {
    pub fn new(mut subgraphs: Vec<SubgraphId>, num_vertices: u64) -> Self {
        subgraphs.sort_unstable();
        subgraphs.dedup();
        GraphView {
            subgraphs: Arc::new(subgraphs),
            num_vertices,
        }
    }

    pub fn subgraphs(&self) -> &[SubgraphId] {
        &self.subgraphs
    }

    pub fn num_vertices(&self) -> u64 {
        self.num_vertices
    }
}

/// Outbound message already resolved to one destination sub-graph.
#[derive(Debug, Clone)]
pub(crate) struct Outgoing<M> {
    pub dest: SubgraphId,
    pub env: Envelope<M>,
}

/// Per-invocation handle for messaging and halting.
pub struct Context<'a, M> {
    superstep: u64,
    subgraph: &'a Subgraph,
    view: &'a GraphView,
    outbox: Vec<Outgoing<M>>,
    halted: bool,
}

impl<'a, M: Clone> Context<'a, M> {
    pub(crate) fn new(superstep: u64, subgraph: &'a Subgraph, view: &'a GraphView) -> Self {
        Context {
            superstep,
            subgraph,
            view,
            outbox: Vec::new(),
            halted: false,
        }
    }

    pub fn superstep(&self) -> u64 {
        self.superstep
    }

    pub fn graph(&self) -> &GraphView {
        self.view
    }

    fn push(&mut self, dest: SubgraphId, target: Target, payload: M) {
        let env = Envelope {
            source: self.subgraph.id(),
            superstep: self.superstep,
            sequence: self.outbox.len() as u64,
            target,
            payload,
        };
        self.outbox.push(Outgoing { dest, env });
    }

    /// One copy per distinct sub-graph reachable over a remote out-edge.
    pub fn send_to_all_subgraph_neighbors(&mut self, payload: M) {
        for &dest in self.subgraph.subgraph_neighbors() {
            self.push(dest, Target::AllNeighbors, payload.clone());
        }
    }

    pub fn send_to_subgraph(&mut self, dest: SubgraphId, payload: M) {
        self.push(dest, Target::Subgraph(dest), payload);
    }

    pub fn send_to_subgraph_vertex(&mut self, dest: SubgraphId, vertex: VertexId, payload: M) {
        self.push(dest, Target::SubgraphVertex(dest, vertex), payload);
    }

    /// One copy to every sub-graph in the graph, the sender included.
    pub fn send_to_all_subgraphs(&mut self, payload: M) {
        let view = self.view;
        for &dest in view.subgraphs() {
            self.push(dest, Target::Broadcast, payload.clone());
        }
    }

    pub fn vote_to_halt(&mut self) {
        self.halted = true;
    }

    pub fn has_voted_to_halt(&self) -> bool {
        self.halted
    }

    pub(crate) fn finish(self) -> (Vec<Outgoing<M>>, bool) {
        (self.outbox, self.halted)
    }
}

/// A sub-graph-centric program. One `State` lives per sub-graph for the
/// whole run; Compute sees the sub-graph read-only.
pub trait ComputeApp: Send + Sync {
    type Message: Payload;
    type State: Send;
    type Value: Clone + Send + Debug + PartialEq + Serialize + DeserializeOwned + 'static;

    fn name(&self) -> &str;

    fn init(&self, sg: &Subgraph) -> Result<Self::State, ComputeError>;

    fn compute(
        &self,
        sg: &Subgraph,
        state: &mut Self::State,
        messages: &[Envelope<Self::Message>],
        ctx: &mut Context<'_, Self::Message>,
    ) -> Result<(), ComputeError>;

    /// Final per-vertex values of one sub-graph.
    fn values(&self, sg: &Subgraph, state: &Self::State) -> Vec<(VertexId, Self::Value)>;
}
