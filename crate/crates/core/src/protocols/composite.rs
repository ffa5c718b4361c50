//! Protocol composites.
//!
//! `reduction` runs the coloring protocol and two virtual black-hole
//! wrapped instances of the ring search in parallel with disjoint teams;
//! whichever reaches the homebase with a verdict first wins. With a base
//! protocol of `t` agents this costs `2t + 2` agents and always produces a
//! node report.
//!
//! `wbfree` chains the interval reducer into an in-interval search, each
//! phase on half the error budget, entirely on the homebase whiteboard.

use super::reducer::Finish;
use super::{algo1, algo2, coloring, reducer, ring_bhs};
use super::{ProtocolParams, COLOR_KEY, TEAM_A0, TEAM_A1, TEAM_PHASE2, TEAM_SOLO};
use crate::engine::{gated_ctx, AgentSpec, ProtocolBundle, WhiteboardMode};
use crate::graph::Graph;
use crate::traversal::{IntervalPartition, TraversalPair};
use std::sync::Arc;

/// Virtual black-hole wrapper: every agent of the returned set runs the base
/// program against a context that suspends on arrival at any node whose
/// ordering parity and color match the trap conditions. `parity` is the `j`
/// of the wrapped instance `A_j`.
pub fn wrap_virtual_bh(agents: Vec<AgentSpec>, parity: u8) -> Vec<AgentSpec> {
    agents
        .into_iter()
        .map(|spec| AgentSpec {
            team: spec.team,
            program: Box::new(move |ctx| (spec.program)(gated_ctx(&ctx, parity, COLOR_KEY))),
        })
        .collect()
}

/// Coloring plus the wrapped ring search pair A_0 and A_1, all in parallel.
pub fn reduction_bundle(tp: Arc<TraversalPair>, params: ProtocolParams) -> ProtocolBundle {
    let delta = params.delta_visits();
    let mut agents = coloring::agents(tp.clone(), delta);
    agents.extend(wrap_virtual_bh(ring_bhs::agents(tp.clone(), TEAM_A0, "a0"), 0));
    agents.extend(wrap_virtual_bh(ring_bhs::agents(tp, TEAM_A1, "a1"), 1));
    ProtocolBundle { name: "reduction", mode: WhiteboardMode::AllNodes, agents }
}

/// Reducer into an in-interval search, budget split evenly. `few_moves`
/// selects the binary search (more agents, fewer moves) over the
/// node-by-node scan.
pub fn wbfree_bundle(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    partition: IntervalPartition,
    params: ProtocolParams,
    few_moves: bool,
) -> ProtocolBundle {
    let half = params.delta / 2.0;
    let reducer_delta = params.delta_visits_for(half);
    let mut agents = reducer::agents(
        graph.clone(),
        tp.clone(),
        partition,
        reducer_delta,
        TEAM_SOLO,
        Finish::Post,
    );
    if few_moves {
        let delta = algo1::stage_delta(params.p, half, tp.radius);
        let pool = algo1::pool_size(tp.radius);
        agents.extend(algo1::agents(graph, tp, delta, None, TEAM_PHASE2, pool));
    } else {
        let delta = params.delta_visits_for(half);
        agents.extend(algo2::agents(graph, tp, delta, None, TEAM_PHASE2));
    }
    ProtocolBundle {
        name: if few_moves { "wbfree-few-moves" } else { "wbfree-few-agents" },
        mode: WhiteboardMode::HomebaseOnly,
        agents,
    }
}
