//! Shared setup for the criterion benches.

use rbhs_core::harness::{Arena, ArenaSource};
use rbhs_core::GraphSpec;

pub fn arena(spec: GraphSpec) -> Arena {
    Arena::prepare(&ArenaSource::Spec(spec), 7).expect("bench arenas are valid")
}
