//! Node-by-node search inside one viable interval: the reducer's
//! claim/validate loop applied to single nodes. Two agents, homebase
//! whiteboard only, O(r^2 + Δr) moves.

use super::route::{delta_visit, IntervalVisit};
use super::{F_CLAIM_L, F_CLAIM_R, F_DONE_L, F_DONE_R, PHASE2_HI_KEY, PHASE2_LO_KEY};
use crate::engine::{wb_key, AgentCtx, AgentSpec, ProtocolBundle, ReportValue, WhiteboardMode};
use crate::graph::Graph;
use crate::traversal::{Interval, Side, TraversalPair};
use std::sync::Arc;

pub fn bundle(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    delta: u32,
    target: Option<Interval>,
) -> ProtocolBundle {
    ProtocolBundle {
        name: "algo2",
        mode: WhiteboardMode::HomebaseOnly,
        agents: agents(graph, tp, delta, target, super::TEAM_PHASE2),
    }
}

/// `target = None` means the interval arrives on the homebase whiteboard
/// from a first phase; the agents suspend until it is posted.
pub fn agents(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    delta: u32,
    target: Option<Interval>,
    team: u8,
) -> Vec<AgentSpec> {
    [Side::Left, Side::Right]
        .into_iter()
        .map(|side| {
            let graph = graph.clone();
            let tp = tp.clone();
            AgentSpec {
                team: "algo2",
                program: Box::new(move |ctx| {
                    Box::pin(run_agent(ctx, graph, tp, delta, target, team, side))
                }),
            }
        })
        .collect()
}

async fn run_agent(
    ctx: AgentCtx,
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    delta: u32,
    target: Option<Interval>,
    team: u8,
    side: Side,
) {
    let (u_lo, u_hi) = match target {
        Some(u) => (u.lo, u.hi),
        None => {
            ctx.suspend_while(|b| b.get(PHASE2_LO_KEY).is_none()).await;
            let lo = ctx.wb_get(PHASE2_LO_KEY).expect("posted") as usize;
            let hi = ctx.wb_get(PHASE2_HI_KEY).expect("posted with lo") as usize;
            (lo, hi)
        }
    };

    let k_done_l = wb_key(team, F_DONE_L);
    let k_done_r = wb_key(team, F_DONE_R);
    let (k_my_done, k_my_claim) = match side {
        Side::Left => (k_done_l, wb_key(team, F_CLAIM_L)),
        Side::Right => (k_done_r, wb_key(team, F_CLAIM_R)),
    };
    let homebase_rank = 1usize;

    loop {
        let done_l = ctx.wb_get(k_done_l).unwrap_or(u_lo as u64 - 1) as usize;
        let done_r = ctx.wb_get(k_done_r).unwrap_or(u_hi as u64 + 1) as usize;
        let (rem_lo, rem_hi) = (done_l + 1, done_r - 1);
        if rem_lo > rem_hi {
            // all validated: survivable only inside the error budget
            let rank = rem_hi.clamp(u_lo, u_hi);
            ctx.report(ReportValue::Node { node: ctx.node_at_rank(rank) });
            return;
        }
        if rem_lo == rem_hi {
            ctx.report(ReportValue::Node { node: ctx.node_at_rank(rem_lo) });
            return;
        }
        let mine = match side {
            Side::Left => rem_lo,
            Side::Right => rem_hi,
        };
        ctx.wb_set(k_my_claim, mine as u64);

        if mine != homebase_rank {
            // the homebase validates trivially; everything else gets the
            // full access-path round trip with a Δ-visit
            delta_visit(
                &ctx,
                &graph,
                &tp,
                IntervalVisit { lo: mine, hi: mine, side, enter_low: true, delta },
            )
            .await;
        }

        ctx.wb_set(k_my_done, mine as u64);
        ctx.wb_set(k_my_claim, 0);
    }
}
