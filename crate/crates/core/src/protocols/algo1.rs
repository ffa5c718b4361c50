//! Binary search inside one viable interval, trading agents for moves:
//! O(r log r + Δr) moves from a pool of ceil(log2 r) + 2 agents.
//!
//! Each stage halves the suspect interval at its pivot. Two pooled agents
//! Δ-visit the two halves through disjoint territory; whichever returns
//! first has cleared its half, so the next stage keeps the other one. Late
//! survivors rejoin the pool. A singleton stage interval is the verdict.

use super::route::{delta_visit, IntervalVisit};
use super::{F_ROLE_L, F_ROLE_R, F_ST_HI, F_ST_IDX, F_ST_LO, PHASE2_HI_KEY, PHASE2_LO_KEY};
use crate::engine::{wb_key, AgentCtx, AgentSpec, ProtocolBundle, ReportValue, WhiteboardMode};
use crate::graph::Graph;
use crate::traversal::{Interval, Side, TraversalPair};
use std::sync::Arc;

/// ceil(log2(radius)) + 2: one stage per halving of an interval of at most
/// radius + 1 nodes, at most one loss per stage, two fresh roles per stage.
pub fn pool_size(radius: usize) -> usize {
    ceil_log2(radius) + 2
}

fn ceil_log2(x: usize) -> usize {
    debug_assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Per-stage visit count: the budget is split across the possible stages.
pub fn stage_delta(p: f64, delta: f64, radius: usize) -> u32 {
    let denom = (radius as f64).log2().max(0.0) + 1.0;
    super::delta_visits(p, delta / denom).expect("valid sub-budget")
}

pub fn bundle(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    params: super::ProtocolParams,
    target: Option<Interval>,
) -> ProtocolBundle {
    let delta = stage_delta(params.p, params.delta, tp.radius);
    let pool = pool_size(tp.radius);
    ProtocolBundle {
        name: "algo1",
        mode: WhiteboardMode::HomebaseOnly,
        agents: agents(graph, tp, delta, target, super::TEAM_PHASE2, pool),
    }
}

/// `target = None` means the interval arrives on the homebase whiteboard
/// from a first phase.
pub fn agents(
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    delta: u32,
    target: Option<Interval>,
    team: u8,
    pool: usize,
) -> Vec<AgentSpec> {
    (0..pool)
        .map(|_| {
            let graph = graph.clone();
            let tp = tp.clone();
            AgentSpec {
                team: "algo1",
                program: Box::new(move |ctx| {
                    Box::pin(run_pool_agent(ctx, graph, tp, delta, target, team))
                }),
            }
        })
        .collect()
}

async fn run_pool_agent(
    ctx: AgentCtx,
    graph: Arc<Graph>,
    tp: Arc<TraversalPair>,
    delta: u32,
    target: Option<Interval>,
    team: u8,
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
    let k_lo = wb_key(team, F_ST_LO);
    let k_hi = wb_key(team, F_ST_HI);
    let k_idx = wb_key(team, F_ST_IDX);
    let k_role_l = wb_key(team, F_ROLE_L);
    let k_role_r = wb_key(team, F_ROLE_R);
    // splitting must converge well within this many stages
    let stage_cap = ceil_log2(u_hi - u_lo + 1) as u64 + 2;

    if ctx.wb_get(k_lo).is_none() {
        ctx.wb_set(k_lo, u_lo as u64);
        ctx.wb_set(k_hi, u_hi as u64);
        ctx.wb_set(k_idx, 1);
    }

    loop {
        // atomic homebase transaction: report, claim a role, or go wait
        let lo = ctx.wb_get(k_lo).unwrap_or(0) as usize;
        let hi = ctx.wb_get(k_hi).unwrap_or(0) as usize;
        let t = ctx.wb_get(k_idx).unwrap_or(1);
        if lo == hi {
            ctx.report(ReportValue::Node { node: ctx.node_at_rank(lo) });
            return;
        }
        let side = if ctx.wb_get(k_role_l).unwrap_or(0) != t {
            ctx.wb_set(k_role_l, t);
            Some(Side::Left)
        } else if ctx.wb_get(k_role_r).unwrap_or(0) != t {
            ctx.wb_set(k_role_r, t);
            Some(Side::Right)
        } else {
            None
        };
        let Some(side) = side else {
            // both roles staffed; sleep until the stage moves
            ctx.suspend_while(move |b| b.get(k_idx).unwrap_or(1) == t).await;
            continue;
        };

        let pivot = (lo + hi) / 2;
        let (half_lo, half_hi, enter_low) = match side {
            Side::Left => (lo, pivot, true),
            Side::Right => (pivot + 1, hi, false),
        };
        delta_visit(
            &ctx,
            &graph,
            &tp,
            IntervalVisit { lo: half_lo, hi: half_hi, side, enter_low, delta },
        )
        .await;

        // back home: the first of the pair to finish moves the stage to the
        // half it did NOT just clear
        if ctx.wb_get(k_idx).unwrap_or(0) == t {
            let (next_lo, next_hi) = match side {
                Side::Left => (pivot + 1, hi),
                Side::Right => (lo, pivot),
            };
            if t + 1 > stage_cap {
                ctx.fail_pool_exhausted();
                return;
            }
            ctx.wb_set(k_lo, next_lo as u64);
            ctx.wb_set(k_hi, next_hi as u64);
            ctx.wb_set(k_idx, t + 1);
        }
    }
}
