//! Write-once partitioned slice store.
//!
//! Each partition directory holds one topology slice per sub-graph, one
//! attribute slice per sub-graph per schema attribute, and `metadata.json`.
//! Edge attributes of remote edges live with the source sub-graph.

pub mod format;
pub mod resolve;
pub mod store;

pub use resolve::{resolve_remote, ClusterView, Endpoint, Resolved};
pub use store::{
    read_attribute_slice, read_topology_slice, write_slices, write_store, GraphInfo, GraphStore, IoCounters,
    PartitionMetadata, PartitionStore, SliceManifest,
};
