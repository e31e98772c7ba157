use crate::gopher::{ComputeApp, ComputeError, Context, Envelope};
use crate::ids::VertexId;
use crate::model::Subgraph;

use super::send_to_undirected_neighbors;

/// HCC-style connected components: every vertex ends labelled with the
/// largest vertex id of its weakly connected component.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConnectedComponents;

impl ComputeApp for ConnectedComponents {
    type Message = u64;
    type State = u64;
    type Value = u64;

    fn name(&self) -> &str {
        "connected-components"
    }

    fn init(&self, sg: &Subgraph) -> Result<u64, ComputeError> {
        // sub-graphs are connected, so the local maximum is already a
        // valid label for all of their vertices
        Ok(sg.vertices().last().map_or(0, |v| v.0))
    }

    fn compute(
        &self,
        sg: &Subgraph,
        label: &mut u64,
        messages: &[Envelope<u64>],
        ctx: &mut Context<'_, u64>,
    ) -> Result<(), ComputeError> {
        let mut changed = ctx.superstep() == 1;
        for m in messages {
            if m.payload > *label {
                *label = m.payload;
                changed = true;
            }
        }
        if changed {
            send_to_undirected_neighbors(sg, ctx, *label);
        } else {
            ctx.vote_to_halt();
        }
        Ok(())
    }

    fn values(&self, sg: &Subgraph, label: &u64) -> Vec<(VertexId, u64)> {
        sg.vertices().iter().map(|&v| (v, *label)).collect()
    }
}
