//! Sub-graph-centric BSP engine.
//!
//! Each partition runs on one worker. In every superstep a worker invokes
//! Compute on each sub-graph that is active or has input messages, routes
//! the resulting envelopes (locally, or batched per destination worker),
//! and reports to the manager, which releases the next superstep or ends
//! the run once every worker is ready to halt.

pub mod app;
pub mod codec;
pub mod config;
pub mod engine;
pub mod explore;
pub mod manager;
pub mod protocol;
pub mod socket;
pub mod stats;
pub mod transport;
pub mod worker;

use thiserror::Error;

use crate::ids::{PartitionId, SubgraphId};

pub use app::{ComputeApp, ComputeError, Context, Envelope, GraphView, Target};
pub use codec::Payload;
pub use config::{EngineConfig, MessageOrder, TransportKind};
pub use engine::{run, RunOutput};
pub use protocol::{Control, ProtocolError};
pub use stats::{Diagnostics, ExecutionStats, LogEntry, SuperstepStats, WorkerOutcome};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("compute failed in partition {partition}, sub-graph {subgraph}, superstep {superstep}: {message}")]
    Compute {
        partition: PartitionId,
        subgraph: SubgraphId,
        superstep: u64,
        message: String,
    },
    #[error("addressing error in superstep {superstep}: {sender} sent to unknown sub-graph {target}")]
    Addressing {
        superstep: u64,
        sender: SubgraphId,
        target: SubgraphId,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("run aborted: {0}")]
    Aborted(String),
    #[error("configuration error: {0}")]
    Config(String),
}
