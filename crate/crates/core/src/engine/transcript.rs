//! Replayable event log.
//!
//! Every observable engine action is one event. Virtual time is monotone
//! non-decreasing across the log (several events may share an instant; the
//! `seq` field makes the composite key strictly increasing), and replaying
//! the same config and seed reproduces the log byte for byte.

use crate::graph::NodeId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "kebab-case")]
pub enum EventKind {
    Depart { from: NodeId, to: NodeId, port: usize },
    Arrive { node: NodeId },
    DieEntry { node: NodeId },
    DieExit { node: NodeId },
    WbRead { node: NodeId, key: u16, value: Option<u64> },
    WbWrite { node: NodeId, key: u16, value: u64 },
    Suspend { node: NodeId },
    Wake { node: NodeId },
    Report { value: ReportValue },
}

/// What a protocol hands to the homebase when it terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportValue {
    /// A single accused node.
    Node { node: NodeId },
    /// A viable interval in 1-based ordering ranks, inclusive.
    Interval { lo: usize, hi: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub time: u64,
    pub agent: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

pub type Transcript = Vec<Event>;

/// Sanity conditions every finished transcript satisfies: the (time, seq)
/// key strictly increases and per-agent depart counts match move accounting.
pub fn check_wellformed(events: &[Event]) -> Result<(), String> {
    let mut last: Option<(u64, u64)> = None;
    for e in events {
        let key = (e.time, e.seq);
        if let Some(prev) = last {
            if key <= prev {
                return Err(format!("event key {key:?} not after {prev:?}"));
            }
        }
        last = Some(key);
    }
    Ok(())
}
