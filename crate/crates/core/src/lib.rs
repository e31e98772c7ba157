//! Sub-graph centric graph analytics.
//!
//! Graphs are k-way partitioned and each partition is split into weakly
//! connected sub-graphs. A user `Compute` runs once per active sub-graph per
//! bulk-synchronous superstep, traversing its sub-graph in memory and
//! exchanging messages with other sub-graphs only at superstep boundaries.
//!
//! - [`model`] / [`partition`]: data model, partitioning, sub-graph discovery.
//! - [`gofs`]: write-once partitioned slice store.
//! - [`gopher`]: BSP engine, worker/manager protocol and transports.
//! - [`algorithms`]: max-vertex, connected components, SSSP, PageRank,
//!   BlockRank and the vertex-centric emulation layout.
//! - [`oracle`]: single-machine reference implementations.

pub mod algorithms;
pub mod attr;
pub mod edgelist;
pub mod error;
pub mod generate;
pub mod gofs;
pub mod gopher;
pub mod graph;
pub mod ids;
pub mod model;
pub mod oracle;
pub mod partition;

pub use ids::{PartitionId, SubgraphId, VertexId};
