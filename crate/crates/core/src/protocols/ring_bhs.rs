//! Two-agent black-hole search on a ring.
//!
//! The searchable arc (everything but the homebase) is split between a
//! low-side agent working clockwise and a high-side agent working
//! counterclockwise; the two jobs always partition the arc, so each agent
//! knows the other's job from its own. Each confirms one node at a time with
//! a cautious walk, recording link marks on the whiteboards along its trail:
//! ACTIVE before first entering the next node, SAFE once it has come back
//! alive. Marks are also the synchronization points: an agent that finishes
//! its share walks the partner's trail through confirmed territory up to the
//! partner's frontier and either reports (one candidate left) or halves the
//! remaining arc, leaving the partner's shrunk job bound as a message on the
//! frontier node's whiteboard, written in the same instant that observed the
//! frontier. The partner's cautious backstep revisits that exact node before
//! it can push any deeper, so the two danger zones never overlap, at most
//! one agent is ever lost, and every renegotiation halves the candidate set:
//! O(n log n) moves overall. The finisher reposts the assignment on the
//! homebase whiteboard when it passes through.
//!
//! The protocol assumes a true black hole (every entry fatal). Run under the
//! virtual black-hole wrapper it faces a trapping node instead of a killing
//! one; both look identical from outside: the enterer never returns.

use super::{F_LEND, F_LNEXT, F_RPREV, F_RSTART, TEAM_SOLO};
use crate::engine::{wb_key, AgentCtx, AgentSpec, ProtocolBundle, ReportValue, WhiteboardMode};
use crate::traversal::TraversalPair;
use std::sync::Arc;

const MARK_ACTIVE: u64 = 1;
const MARK_SAFE: u64 = 2;

pub fn bundle(tp: Arc<TraversalPair>) -> ProtocolBundle {
    ProtocolBundle {
        name: "ring-bhs",
        mode: WhiteboardMode::AllNodes,
        agents: agents(tp, TEAM_SOLO, "ring-bhs"),
    }
}

/// The two search agents, reusable by the reduction composite (which wraps
/// their contexts with the virtual black-hole gate and gives each instance
/// its own whiteboard namespace).
pub fn agents(tp: Arc<TraversalPair>, team: u8, label: &'static str) -> Vec<AgentSpec> {
    [true, false]
        .into_iter()
        .map(|low_side| {
            let tp = tp.clone();
            AgentSpec {
                team: label,
                program: Box::new(move |ctx| Box::pin(run_agent(ctx, tp, team, low_side))),
            }
        })
        .collect()
}

struct Lens {
    n: usize,
    low_side: bool,
    my_mark: u16,
    their_mark: u16,
    my_bound: u16,
    their_bound: u16,
}

impl Lens {
    fn my_next(&self, k: usize) -> usize {
        if self.low_side {
            k + 1
        } else if k == 1 {
            self.n
        } else {
            k - 1
        }
    }

    fn their_next(&self, k: usize) -> usize {
        if self.low_side {
            if k == 1 {
                self.n
            } else {
                k - 1
            }
        } else {
            k + 1
        }
    }

    /// Nodes on my side still to confirm, given frontier `f` and bound `b`.
    fn remaining(&self, f: usize, b: usize) -> usize {
        if self.low_side {
            b.saturating_sub(f)
        } else if f == 1 {
            self.n + 1 - b
        } else {
            f.saturating_sub(b)
        }
    }

    /// Tighten my job bound with a message read from a whiteboard. Bounds
    /// move monotonically (a low-side job end only shrinks, a high-side job
    /// start only grows), so re-reads merge away.
    fn merge_bound(&self, current: usize, read: Option<u64>) -> usize {
        match read {
            None => current,
            Some(v) => {
                let v = v as usize;
                if self.low_side {
                    current.min(v)
                } else {
                    current.max(v)
                }
            }
        }
    }

    /// My trail ranks walking out from the homebase up to `upto`, exclusive
    /// of home itself.
    fn my_trail(&self, upto: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut k = 1;
        while k != upto {
            k = self.my_next(k);
            out.push(k);
        }
        out
    }

    fn their_trail(&self, upto: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut k = 1;
        while k != upto {
            k = self.their_next(k);
            out.push(k);
        }
        out
    }
}

enum Inspection {
    /// Exactly one unconfirmed candidate: it is the hole, by elimination.
    Report(usize),
    /// No candidates anywhere; only reachable when a crossing of the hole
    /// was survived and the marks lie. Report something and terminate.
    Fallback(usize),
    /// Candidates were halved; my own job bound moved to the given rank.
    Extended(usize),
}

async fn run_agent(ctx: AgentCtx, tp: Arc<TraversalPair>, team: u8, low_side: bool) {
    crate::engine::initial_gate(&ctx).await;

    let n = tp.n();
    let lens = Lens {
        n,
        low_side,
        my_mark: if low_side { wb_key(team, F_LNEXT) } else { wb_key(team, F_RPREV) },
        their_mark: if low_side { wb_key(team, F_RPREV) } else { wb_key(team, F_LNEXT) },
        my_bound: if low_side { wb_key(team, F_LEND) } else { wb_key(team, F_RSTART) },
        their_bound: if low_side { wb_key(team, F_RSTART) } else { wb_key(team, F_LEND) },
    };
    let node = |rank: usize| tp.node(rank);

    // Initial split of [2..=n]: low side takes [2..=mid], high side the rest.
    let mid = 1 + (n - 1).div_ceil(2);
    if ctx.wb_get(wb_key(team, F_LEND)).is_none() {
        ctx.wb_set(wb_key(team, F_LEND), mid as u64);
    }
    if ctx.wb_get(wb_key(team, F_RSTART)).is_none() {
        ctx.wb_set(wb_key(team, F_RSTART), (mid + 1) as u64);
    }

    let mut bound = lens.merge_bound(if low_side { n } else { 2 }, ctx.wb_get(lens.my_bound));
    let mut frontier = 1usize; // last confirmed rank on my trail; 1 = none yet

    loop {
        // ---- work phase: walk out to my frontier, then nibble to my bound.
        for r in lens.my_trail(frontier) {
            ctx.move_to(node(r)).await;
        }
        loop {
            bound = lens.merge_bound(bound, ctx.wb_get(lens.my_bound));
            if lens.remaining(frontier, bound) == 0 {
                break;
            }
            let danger = lens.my_next(frontier);
            ctx.wb_set(lens.my_mark, MARK_ACTIVE);
            ctx.move_to(node(danger)).await; // may never return
            ctx.move_to(node(frontier)).await; // cautious backstep
            bound = lens.merge_bound(bound, ctx.wb_get(lens.my_bound));
            ctx.wb_set(lens.my_mark, MARK_SAFE);
            ctx.move_to(node(danger)).await;
            frontier = danger;
        }

        // ---- my share is confirmed: walk home through my own trail.
        let mut trail = lens.my_trail(frontier);
        trail.pop();
        for r in trail.into_iter().rev() {
            ctx.move_to(node(r)).await;
        }
        if frontier != 1 {
            ctx.move_to(node(1)).await;
        }

        // ---- inspect the partner's trail from behind. The jobs partition
        // the arc, so my own bound tells me where the partner's job starts.
        let mut at = 1usize;
        let decision = loop {
            // One atomic instant per trail node: read the partner's link
            // mark and, if this is its frontier, leave any truncation
            // message right here. The partner cannot push past its frontier
            // without re-reading this board first.
            let mark = ctx.wb_get(lens.their_mark).unwrap_or(0);
            if mark == MARK_SAFE {
                let nx = lens.their_next(at);
                ctx.move_to(node(nx)).await;
                at = nx;
                continue;
            }
            let (cand_lo, cand_hi) = if low_side {
                let hi = if at == 1 { n } else { at - 1 };
                (bound + 1, hi)
            } else {
                (at + 1, bound - 1)
            };
            if cand_lo > cand_hi {
                break Inspection::Fallback(cand_lo.clamp(2, n));
            }
            if cand_lo == cand_hi {
                break Inspection::Report(cand_lo);
            }
            let u = cand_hi - cand_lo + 1;
            if low_side {
                // the partner keeps [y..=cand_hi], adjacent to its frontier
                let y = cand_hi - u / 2 + 1;
                ctx.wb_set(lens.their_bound, y as u64);
                break Inspection::Extended(y - 1);
            } else {
                // the partner keeps [cand_lo..=x]
                let x = cand_lo + u / 2 - 1;
                ctx.wb_set(lens.their_bound, x as u64);
                break Inspection::Extended(x + 1);
            }
        };

        // walk home along the partner's trail
        let mut trail = lens.their_trail(at);
        trail.pop();
        for r in trail.into_iter().rev() {
            ctx.move_to(node(r)).await;
        }
        if at != 1 {
            ctx.move_to(node(1)).await;
        }

        match decision {
            Inspection::Report(rank) | Inspection::Fallback(rank) => {
                ctx.report(ReportValue::Node { node: node(rank) });
                return;
            }
            Inspection::Extended(new_bound) => {
                // repost the assignment on the homebase whiteboard
                let split = if low_side { new_bound } else { new_bound - 1 };
                ctx.wb_set(wb_key(team, F_LEND), split as u64);
                ctx.wb_set(wb_key(team, F_RSTART), (split + 1) as u64);
                bound = new_bound;
            }
        }
    }
}
