//! Shared itinerary: leave the homebase along a constrained access path,
//! traverse the walk segment covering an interval while Δ-visiting each of
//! its members on first visit, and come back. Used by the interval reducer,
//! the node-by-node search (degenerate one-node interval) and the
//! binary-search stages.

use crate::engine::AgentCtx;
use crate::graph::Graph;
use crate::traversal::{access_path, Side, TraversalPair};

pub(crate) struct IntervalVisit {
    /// 1-based ordering ranks, inclusive.
    pub lo: usize,
    pub hi: usize,
    pub side: Side,
    /// Whether the traversal enters at `lo` (the reducer's shape for both
    /// agents) or at `hi` (the binary search's right role).
    pub enter_low: bool,
    pub delta: u32,
}

/// Full round trip from the homebase. A Δ-visit bounces to the previously
/// visited node; the homebase itself is never Δ-visited (it has no
/// predecessor on the route and is known safe).
pub(crate) async fn delta_visit(
    ctx: &AgentCtx,
    graph: &Graph,
    tp: &TraversalPair,
    v: IntervalVisit,
) {
    debug_assert!(1 <= v.lo && v.lo <= v.hi && v.hi <= tp.n());
    let (entry, exit) = if v.enter_low { (v.lo, v.hi) } else { (v.hi, v.lo) };

    let out = access_path(tp, graph, entry, v.side);
    ctx.walk_path(&out).await;
    let mut prev = if out.len() >= 2 { Some(out[out.len() - 2]) } else { None };

    // walk-slice positions between the first occurrences of entry and exit,
    // in traversal order for this shape
    let occ_entry = tp.first_occurrence(v.side, entry);
    let occ_exit = tp.first_occurrence(v.side, exit);
    let positions: Vec<usize> = if occ_entry <= occ_exit {
        (occ_entry..=occ_exit).collect()
    } else {
        (occ_exit..=occ_entry).rev().collect()
    };

    let walk = tp.walk(v.side);
    let mut seen = vec![false; tp.n() + 1];
    for (i, &pos) in positions.iter().enumerate() {
        let node = walk[pos];
        if i > 0 {
            ctx.move_to(node).await;
        }
        let rank = tp.rank(node);
        if rank >= v.lo && rank <= v.hi && !seen[rank] {
            seen[rank] = true;
            if let Some(p) = prev {
                for _ in 0..v.delta {
                    ctx.move_to(p).await;
                    ctx.move_to(node).await;
                }
            }
        }
        prev = Some(node);
    }

    let back = access_path(tp, graph, exit, v.side);
    for &n in back.iter().rev().skip(1) {
        ctx.move_to(n).await;
    }
}
