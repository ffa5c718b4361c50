//! Two-agent coloring semi-solution.
//!
//! Agents explore along the two traversal-pair walks from opposite ends,
//! recording a color in {0,1,2,3} on each node's whiteboard: 1 on first
//! visit, 2 after surviving the node's Δ-visit, 3 on a node whose
//! path-successor has been visited. Meeting a node colored 1 or 2 by the
//! other agent (and never by oneself) triggers a return to the homebase and
//! a report of that node. The run may instead end with both agents killed,
//! in which case the final coloring isolates the hole to a constant-size
//! neighborhood; composites exploit exactly that.

use super::{color_of, color_raise};
use crate::engine::{AgentCtx, AgentSpec, ProtocolBundle, ReportValue, WhiteboardMode};
use crate::graph::NodeId;
use crate::traversal::{Side, TraversalPair};
use std::sync::Arc;

pub fn bundle(tp: Arc<TraversalPair>, delta: u32) -> ProtocolBundle {
    ProtocolBundle {
        name: "coloring",
        mode: WhiteboardMode::AllNodes,
        agents: agents(tp, delta),
    }
}

/// The two coloring agents, reusable inside composites.
pub fn agents(tp: Arc<TraversalPair>, delta: u32) -> Vec<AgentSpec> {
    [Side::Left, Side::Right]
        .into_iter()
        .map(|side| {
            let tp = tp.clone();
            AgentSpec {
                team: "coloring",
                program: Box::new(move |ctx| Box::pin(run_agent(ctx, tp, side, delta))),
            }
        })
        .collect()
}

async fn run_agent(ctx: AgentCtx, tp: Arc<TraversalPair>, side: Side, delta: u32) {
    let walk: Vec<NodeId> = tp.walk(side).to_vec();
    let n = tp.n();
    let home = tp.homebase();
    let mut visited = vec![false; n];

    // position of each node's first occurrence in my walk
    let mut first_pos = vec![usize::MAX; n];
    for (p, &v) in walk.iter().enumerate() {
        if first_pos[v] == usize::MAX {
            first_pos[v] = p;
        }
    }

    if side == Side::Right {
        // launch: cross the homebase-terminal edge to the walk's start
        visited[home] = true;
        ctx.move_to(walk[0]).await;
    }

    let mut pos = 0;
    loop {
        let v = walk[pos];
        if first_pos[v] == pos && !visited[v] {
            let c = color_of(&ctx);
            if c == 1 || c == 2 {
                // colored by the other agent: accuse it and go home
                visited[v] = true;
                go_home(&ctx, &walk, pos, home).await;
                ctx.report(ReportValue::Node { node: v });
                return;
            }
            if c == 0 {
                color_raise(&ctx, 1);
                let my_rank = tp.rank(v);
                let pred_rank = match side {
                    Side::Left if my_rank > 1 => Some(my_rank - 1),
                    Side::Right if my_rank < n => Some(my_rank + 1),
                    _ => None,
                };
                if let Some(pr) = pred_rank {
                    // step back along the walk to the path-predecessor,
                    // mark it 3, return
                    let pred_node = tp.node(pr);
                    let back_to = (0..pos)
                        .rev()
                        .find(|&q| walk[q] == pred_node)
                        .expect("path-predecessor occurs earlier in the walk");
                    for q in (back_to..pos).rev() {
                        ctx.move_to(walk[q]).await;
                    }
                    color_raise(&ctx, 3);
                    for &step in &walk[back_to + 1..=pos] {
                        ctx.move_to(step).await;
                    }
                }
                // Δ-visit: round trips to the last visited node. The right
                // agent's first partner is the homebase it launched from;
                // the left agent has no partner at the homebase itself.
                let partner = if pos > 0 {
                    Some(walk[pos - 1])
                } else if side == Side::Right {
                    Some(home)
                } else {
                    None
                };
                if let Some(u) = partner {
                    for _ in 0..delta {
                        ctx.move_to(u).await;
                        ctx.move_to(v).await;
                    }
                }
                color_raise(&ctx, 2);
            }
            // c == 3 passes through untouched
        }
        visited[v] = true;
        if pos + 1 < walk.len() {
            pos += 1;
            ctx.move_to(walk[pos]).await;
        } else {
            break;
        }
    }
    // walk exhausted without meeting the other side; idle at home
    go_home(&ctx, &walk, walk.len() - 1, home).await;
}

async fn go_home(ctx: &AgentCtx, walk: &[NodeId], from_pos: usize, home: NodeId) {
    if walk[from_pos] == home {
        return;
    }
    for q in (0..from_pos).rev() {
        ctx.move_to(walk[q]).await;
        if walk[q] == home {
            return;
        }
    }
    if walk[0] != home {
        ctx.move_to(home).await;
    }
}
