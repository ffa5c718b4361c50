//! Simulator and protocol library for locating a probabilistically lethal
//! node (an "rB-hole") in a biconnected network with asynchronous mobile
//! agents.
//!
//! An rB-hole kills each visiting agent independently with some probability
//! on entry and again on exit; a classical black hole is the special case
//! where that probability is 1. The crate provides:
//!
//! - [`graph`]: arenas (parsing, generators, biconnectivity, st-ordering);
//! - [`traversal`]: traversal pairs, their size/radius metrics, and the
//!   viable-interval partition used by the homebase-only protocols;
//! - [`engine`]: a deterministic discrete-event simulator with whiteboards,
//!   adversarial schedulers, kill coins and replayable transcripts;
//! - [`protocols`]: the agent protocols (coloring, the virtual black-hole
//!   reduction with a concrete ring search, interval reduction, and the
//!   homebase-only node searches) plus their composites;
//! - [`harness`]: seeded Monte Carlo experiments, statistics and reports;
//! - [`acceptance`]: the full verification battery run by `rbhs suite` and
//!   the acceptance integration test.
//!
//! Everything is deterministic per `(config, seed)`: replaying a run yields
//! byte-identical transcripts and reports.

pub mod acceptance;
pub mod engine;
pub mod error;
pub mod graph;
pub mod harness;
pub mod protocols;
pub mod rng;
pub mod traversal;

pub use engine::{
    run_to_completion, AgentCtx, EngineConfig, ProtocolBundle, ReportValue, RunRecord,
    SchedulerPolicy, WhiteboardMode,
};
pub use error::{EngineError, GraphError, HarnessError, TraversalError};
pub use graph::{
    default_endpoints, generate_graph, parse_graph, st_numbering, Graph, GraphSpec, NodeId,
    Ordering,
};
pub use protocols::{delta_visits, ProtocolId, ProtocolParams};
pub use traversal::{
    access_path, build_traversal_pair, interval_weight, normalize_property1, partition_viable,
    Interval, IntervalPartition, Side, TraversalPair,
};
