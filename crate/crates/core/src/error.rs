//! Error types, one enum per subsystem.

use thiserror::Error;

/// Errors from graph parsing, generation and ordering construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("empty graph input")]
    EmptyGraph,
    #[error("malformed edge list: {0}")]
    Malformed(String),
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("graph is not biconnected")]
    NotBiconnected,
}

/// Errors from traversal-pair construction and interval queries.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraversalError {
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("interval [{lo},{hi}] out of range 1..={n}")]
    IndexError { lo: usize, hi: usize, n: usize },
}

/// Fatal simulation failures. A run that hits one of these is aborted
/// and reported with the offending trial seed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
    #[error("protocol bug: {0}")]
    ProtocolBug(String),
    #[error("whiteboard overflow at node {node}: {bits} bits > capacity {capacity}")]
    WhiteboardOverflow { node: usize, bits: u32, capacity: u32 },
    #[error("no whiteboard at node {0}")]
    NoWhiteboard(usize),
    #[error("event cap of {0} exceeded; protocol looks non-terminating")]
    RunawayProtocol(u64),
    #[error("agent pool exhausted")]
    PoolExhausted,
}

/// Errors from experiment configuration and report emission.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
    #[error("trial with seed {seed} failed: {source}")]
    TrialFailed { seed: u64, source: EngineError },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
