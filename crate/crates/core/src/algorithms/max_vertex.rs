use crate::attr::AttrValue;
use crate::graph::VALUE_ATTR;
use crate::gopher::{ComputeApp, ComputeError, Context, Envelope};
use crate::ids::VertexId;
use crate::model::Subgraph;

use super::send_to_undirected_neighbors;

/// Propagates the largest vertex value to every sub-graph.
///
/// Input values come from the `value` vertex attribute, or the vertex id
/// when the attribute is absent; null entries are ignored. Edges are
/// followed in both directions.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxVertex;

pub(crate) fn vertex_inputs(sg: &Subgraph) -> Vec<f64> {
    match sg.attribute(VALUE_ATTR) {
        Some(col) => col
            .values()
            .iter()
            .map(|v| v.as_ref().and_then(AttrValue::as_f64).unwrap_or(f64::NEG_INFINITY))
            .collect(),
        None => sg.vertices().iter().map(|v| v.0 as f64).collect(),
    }
}

impl ComputeApp for MaxVertex {
    type Message = f64;
    type State = f64;
    type Value = f64;

    fn name(&self) -> &str {
        "max-vertex"
    }

    fn init(&self, _sg: &Subgraph) -> Result<f64, ComputeError> {
        Ok(f64::NEG_INFINITY)
    }

    fn compute(
        &self,
        sg: &Subgraph,
        value: &mut f64,
        messages: &[Envelope<f64>],
        ctx: &mut Context<'_, f64>,
    ) -> Result<(), ComputeError> {
        if ctx.superstep() == 1 {
            *value = vertex_inputs(sg).into_iter().fold(f64::NEG_INFINITY, f64::max);
        }
        let mut changed = ctx.superstep() == 1;
        for m in messages {
            if m.payload > *value {
                *value = m.payload;
                changed = true;
            }
        }
        if changed {
            send_to_undirected_neighbors(sg, ctx, *value);
        } else {
            ctx.vote_to_halt();
        }
        Ok(())
    }

    fn values(&self, sg: &Subgraph, value: &f64) -> Vec<(VertexId, f64)> {
        sg.vertices().iter().map(|&v| (v, *value)).collect()
    }
}
