//! Agent protocols: the coloring semi-solution, the virtual black-hole
//! reduction with a concrete ring search as base protocol, and the
//! homebase-only pipeline (interval reduction followed by an in-interval
//! node search).
//!
//! Protocol programs are coroutine-style state machines driven by one
//! engine; they own no shared state outside whiteboards. Whiteboard fields
//! are keyed by `(team, field)` so parallel teams never collide.

pub mod algo1;
pub mod algo2;
pub mod coloring;
pub mod composite;
pub mod reducer;
pub mod ring_bhs;
mod route;
#[cfg(test)]
mod tests;

use crate::engine::{wb_key, AgentCtx, ProtocolBundle, WbKey, WhiteboardMode};
use crate::error::HarnessError;
use crate::graph::Graph;
use crate::traversal::{Interval, IntervalPartition, TraversalPair};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

// Whiteboard field layout. At most 16 distinct fields may live on one board,
// matching the 4 tag bits charged per entry by the accounting model.
pub const TEAM_SHARED: u8 = 0;
pub const TEAM_A0: u8 = 1;
pub const TEAM_A1: u8 = 2;
pub const TEAM_SOLO: u8 = 3;
pub const TEAM_PHASE2: u8 = 4;

/// Node color written by the coloring protocol, read by wrapper gates.
pub const F_COLOR: u8 = 0;
// ring search marks and job bounds (per team)
pub const F_LNEXT: u8 = 1;
pub const F_RPREV: u8 = 2;
pub const F_LEND: u8 = 3;
pub const F_RSTART: u8 = 4;
// claim/validate bookkeeping (reducer and the node-by-node search)
pub const F_DONE_L: u8 = 5;
pub const F_DONE_R: u8 = 6;
pub const F_CLAIM_L: u8 = 7;
pub const F_CLAIM_R: u8 = 8;
// composite handoff: interval posted by the reduction phase
pub const F_PHASE2_LO: u8 = 9;
pub const F_PHASE2_HI: u8 = 10;
// binary-search stage state
pub const F_ST_LO: u8 = 11;
pub const F_ST_HI: u8 = 12;
pub const F_ST_IDX: u8 = 13;
pub const F_ROLE_L: u8 = 14;
pub const F_ROLE_R: u8 = 15;

pub const COLOR_KEY: WbKey = wb_key(TEAM_SHARED, F_COLOR);
/// Homebase keys carrying the interval handed from the reduction phase to
/// the in-interval search phase of the composites.
pub const PHASE2_LO_KEY: WbKey = wb_key(TEAM_PHASE2, F_PHASE2_LO);
pub const PHASE2_HI_KEY: WbKey = wb_key(TEAM_PHASE2, F_PHASE2_HI);

/// Reads the local node color (0 when unwritten).
pub(crate) fn color_of(ctx: &AgentCtx) -> u64 {
    ctx.wb_get(COLOR_KEY).unwrap_or(0)
}

/// Colors only ever increase over a run.
pub(crate) fn color_raise(ctx: &AgentCtx, c: u64) {
    if color_of(ctx) < c {
        ctx.wb_set(COLOR_KEY, c);
    }
}

/// Probability machinery shared by every protocol run: the assumed kill
/// floor `p`, the user error budget `delta`, and the visit count derived
/// from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Lower bound on the hole's kill probability, in (0, 1].
    pub p: f64,
    /// Error budget, in (0, 1].
    pub delta: f64,
}

impl ProtocolParams {
    pub fn new(p: f64, delta: f64) -> Result<Self, HarnessError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(HarnessError::InvalidParams(format!("p = {p} not in (0, 1]")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(HarnessError::InvalidParams(format!("delta = {delta} not in (0, 1]")));
        }
        Ok(Self { p, delta })
    }

    /// Visit count for this protocol's whole budget.
    pub fn delta_visits(&self) -> u32 {
        delta_visits(self.p, self.delta).expect("validated on construction")
    }

    /// Visit count for a sub-budget (composites split `delta`).
    pub fn delta_visits_for(&self, budget: f64) -> u32 {
        delta_visits(self.p, budget).expect("budgets stay in (0, 1]")
    }
}

/// Number of round trips that amplifies the kill probability to at least
/// `1 - delta_effective`: zero when `p = 1`, else
/// `ceil(log_{1-p}(delta_effective))`, so `(1-p)^Delta <= delta_effective`.
pub fn delta_visits(p: f64, delta_effective: f64) -> Result<u32, HarnessError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(HarnessError::InvalidParams(format!("p = {p} not in (0, 1]")));
    }
    if !(delta_effective > 0.0 && delta_effective <= 1.0) {
        return Err(HarnessError::InvalidParams(format!(
            "delta = {delta_effective} not in (0, 1]"
        )));
    }
    if p == 1.0 {
        return Ok(0);
    }
    // Nudge below exact-integer ratios so ceil() does not overshoot on
    // floating-point dust; the guarantee is re-checked in tests.
    let ratio = delta_effective.ln() / (1.0 - p).ln();
    Ok((ratio - 1e-9).ceil().max(0.0) as u32)
}

/// CLI-facing protocol identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    Coloring,
    Reduction,
    Reducer,
    Algo1,
    Algo2,
    WbfreeFewAgents,
    WbfreeFewMoves,
    RingBhs,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 8] = [
        ProtocolId::Coloring,
        ProtocolId::Reduction,
        ProtocolId::Reducer,
        ProtocolId::Algo1,
        ProtocolId::Algo2,
        ProtocolId::WbfreeFewAgents,
        ProtocolId::WbfreeFewMoves,
        ProtocolId::RingBhs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolId::Coloring => "coloring",
            ProtocolId::Reduction => "reduction",
            ProtocolId::Reducer => "reducer",
            ProtocolId::Algo1 => "algo1",
            ProtocolId::Algo2 => "algo2",
            ProtocolId::WbfreeFewAgents => "wbfree-few-agents",
            ProtocolId::WbfreeFewMoves => "wbfree-few-moves",
            ProtocolId::RingBhs => "ring-bhs",
        }
    }

    pub fn whiteboard_mode(&self) -> WhiteboardMode {
        match self {
            ProtocolId::Coloring | ProtocolId::Reduction | ProtocolId::RingBhs => {
                WhiteboardMode::AllNodes
            }
            ProtocolId::Reducer
            | ProtocolId::Algo1
            | ProtocolId::Algo2
            | ProtocolId::WbfreeFewAgents
            | ProtocolId::WbfreeFewMoves => WhiteboardMode::HomebaseOnly,
        }
    }

    /// Protocols built on the shipped ring base protocol only run on rings.
    pub fn requires_ring(&self) -> bool {
        matches!(self, ProtocolId::Reduction | ProtocolId::RingBhs)
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| HarnessError::InvalidParams(format!("unknown protocol '{s}'")))
    }
}

pub(crate) fn ensure_ring(g: &Graph, tp: &TraversalPair) -> Result<(), HarnessError> {
    let n = g.node_count();
    let ok = (0..n).all(|v| g.degree(v) == 2)
        && (1..n).all(|k| g.has_edge(tp.node(k), tp.node(k + 1)))
        && g.has_edge(tp.node(n), tp.node(1));
    if ok {
        Ok(())
    } else {
        Err(HarnessError::InvalidParams(
            "this protocol requires a ring arena with the ring ordering".into(),
        ))
    }
}

/// Builds the agent bundle for a protocol instance. `target` supplies the
/// interval searched by the standalone in-interval protocols; when absent it
/// defaults to the viable interval containing `hole_rank`.
pub fn build_bundle(
    id: ProtocolId,
    graph: &Arc<Graph>,
    tp: &Arc<TraversalPair>,
    partition: &IntervalPartition,
    params: ProtocolParams,
    target: Option<Interval>,
    hole_rank: usize,
) -> Result<ProtocolBundle, HarnessError> {
    if id.requires_ring() {
        ensure_ring(graph, tp)?;
    }
    let default_target = || -> Interval {
        target.unwrap_or_else(|| {
            *partition
                .containing(hole_rank)
                .expect("partition covers every rank")
        })
    };
    Ok(match id {
        ProtocolId::Coloring => coloring::bundle(tp.clone(), params.delta_visits()),
        ProtocolId::RingBhs => ring_bhs::bundle(tp.clone()),
        ProtocolId::Reduction => composite::reduction_bundle(tp.clone(), params),
        ProtocolId::Reducer => {
            reducer::bundle(graph.clone(), tp.clone(), partition.clone(), params.delta_visits())
        }
        ProtocolId::Algo1 => {
            algo1::bundle(graph.clone(), tp.clone(), params, Some(default_target()))
        }
        ProtocolId::Algo2 => algo2::bundle(
            graph.clone(),
            tp.clone(),
            params.delta_visits(),
            Some(default_target()),
        ),
        ProtocolId::WbfreeFewAgents => {
            composite::wbfree_bundle(graph.clone(), tp.clone(), partition.clone(), params, false)
        }
        ProtocolId::WbfreeFewMoves => {
            composite::wbfree_bundle(graph.clone(), tp.clone(), partition.clone(), params, true)
        }
    })
}

/// Agents a protocol spawns on a given arena, before any run.
pub fn agent_budget(id: ProtocolId, tp: &TraversalPair) -> usize {
    match id {
        ProtocolId::Coloring | ProtocolId::Reducer | ProtocolId::Algo2 | ProtocolId::RingBhs => 2,
        ProtocolId::Reduction => 6,
        ProtocolId::Algo1 => algo1::pool_size(tp.radius),
        ProtocolId::WbfreeFewAgents => 4,
        ProtocolId::WbfreeFewMoves => 2 + algo1::pool_size(tp.radius),
    }
}

