//! Interval reducer: narrows the hole down to one viable interval using only
//! the homebase whiteboard.
//!
//! The two agents share the precomputed viable partition. Claims live on the
//! homebase whiteboard and are taken atomically: the left agent claims
//! intervals in ascending index, the right agent descending, so no node
//! outside the homebase and the access paths is ever toured by both. A
//! claimed interval is Δ-visited via its side's access path and walk
//! segment. An agent back at the homebase that sees exactly one interval not
//! yet completed reports it: every other interval was Δ-visited by a
//! survivor, so the hole is in the last one unless a Δ-visit of the hole was
//! survived, which is exactly the error budget.

use super::route::{delta_visit, IntervalVisit};
use super::{F_CLAIM_L, F_CLAIM_R, F_DONE_L, F_DONE_R, PHASE2_HI_KEY, PHASE2_LO_KEY};
use crate::engine::{wb_key, AgentCtx, AgentSpec, ProtocolBundle, ReportValue, WhiteboardMode};
use crate::graph::Graph;
use crate::traversal::{IntervalPartition, Side, TraversalPair};
use std::sync::Arc;

/// How the winning interval leaves the protocol.
#[derive(Clone, Copy, PartialEq)]
pub enum Finish {
    /// Report to the engine (standalone run).
    Report,
    /// Post onto the homebase whiteboard for a second phase.
    Post,
}

pub fn bundle(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    partition: IntervalPartition,
    delta: u32,
) -> ProtocolBundle {
    ProtocolBundle {
        name: "reducer",
        mode: WhiteboardMode::HomebaseOnly,
        agents: agents(graph, tp, partition, delta, super::TEAM_SOLO, Finish::Report),
    }
}

pub fn agents(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    partition: IntervalPartition,
    delta: u32,
    team: u8,
    finish: Finish,
) -> Vec<AgentSpec> {
    [Side::Left, Side::Right]
        .into_iter()
        .map(|side| {
            let graph = graph.clone();
            let tp = tp.clone();
            let partition = partition.clone();
            AgentSpec {
                team: "reducer",
                program: Box::new(move |ctx| {
                    Box::pin(run_agent(ctx, graph, tp, partition, delta, team, side, finish))
                }),
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
async fn run_agent(
    ctx: AgentCtx,
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    partition: IntervalPartition,
    delta: u32,
    team: u8,
    side: Side,
    finish: Finish,
) {
    let f = partition.len();
    let k_done_l = wb_key(team, F_DONE_L);
    let k_done_r = wb_key(team, F_DONE_R);
    let (k_my_done, k_my_claim) = match side {
        Side::Left => (k_done_l, wb_key(team, F_CLAIM_L)),
        Side::Right => (k_done_r, wb_key(team, F_CLAIM_R)),
    };

    loop {
        // one atomic homebase transaction: read progress, then either
        // finish, or claim the next interval on my side
        if finish == Finish::Post && ctx.wb_get(PHASE2_LO_KEY).is_some() {
            return; // the other agent already handed off
        }
        let done_l = ctx.wb_get(k_done_l).unwrap_or(0) as usize;
        let done_r = ctx.wb_get(k_done_r).unwrap_or(f as u64 + 1) as usize;
        let (rem_lo, rem_hi) = (done_l + 1, done_r - 1);
        if rem_lo > rem_hi {
            // everything validated: only reachable when a Δ-visit of the
            // hole was survived; close out inside the error budget
            emit(&ctx, &partition, rem_hi.clamp(1, f), finish);
            return;
        }
        if rem_lo == rem_hi {
            emit(&ctx, &partition, rem_lo, finish);
            return;
        }
        let mine = match side {
            Side::Left => rem_lo,
            Side::Right => rem_hi,
        };
        ctx.wb_set(k_my_claim, mine as u64);

        let u = partition.intervals[mine - 1];
        delta_visit(
            &ctx,
            &graph,
            &tp,
            IntervalVisit { lo: u.lo, hi: u.hi, side, enter_low: true, delta },
        )
        .await;

        ctx.wb_set(k_my_done, mine as u64);
        ctx.wb_set(k_my_claim, 0);
    }
}

fn emit(ctx: &AgentCtx, partition: &IntervalPartition, index: usize, finish: Finish) {
    let u = partition.intervals[index - 1];
    match finish {
        Finish::Report => ctx.report(ReportValue::Interval { lo: u.lo, hi: u.hi }),
        Finish::Post => {
            ctx.wb_set(PHASE2_LO_KEY, u.lo as u64);
            ctx.wb_set(PHASE2_HI_KEY, u.hi as u64);
        }
    }
}
