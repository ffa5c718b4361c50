//! Per-node shared memory with bit-size accounting.
//!
//! A whiteboard stores small keyed registers. The accounting model charges
//! 4 tag bits per present entry (protocols use at most 16 distinct fields on
//! any one board) plus the value's minimal width, and the engine rejects any
//! write that would push a board past its configured capacity.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Field key: high byte is the owning team, low byte the field id.
pub type WbKey = u16;

pub const fn wb_key(team: u8, field: u8) -> WbKey {
    ((team as u16) << 8) | field as u16
}

pub const TAG_BITS: u32 = 4;

fn value_bits(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Whiteboard {
    entries: BTreeMap<WbKey, u64>,
}

impl Whiteboard {
    pub fn get(&self, key: WbKey) -> Option<u64> {
        self.entries.get(&key).copied()
    }

    pub fn set(&mut self, key: WbKey, value: u64) {
        self.entries.insert(key, value);
    }

    /// Total encoded size under the accounting model.
    pub fn bits(&self) -> u32 {
        self.entries
            .values()
            .map(|&v| TAG_BITS + value_bits(v))
            .sum()
    }

    pub fn entries(&self) -> &BTreeMap<WbKey, u64> {
        &self.entries
    }
}

/// Default capacity: `32 * ceil(log2 n)` bits.
pub fn default_capacity_bits(n: usize) -> u32 {
    debug_assert!(n >= 2);
    let ceil_log2 = usize::BITS - (n - 1).leading_zeros();
    32 * ceil_log2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accounting() {
        let mut b = Whiteboard::default();
        assert_eq!(b.bits(), 0);
        b.set(wb_key(0, 0), 0);
        assert_eq!(b.bits(), TAG_BITS + 1, "zero still occupies one value bit");
        b.set(wb_key(0, 0), 3);
        assert_eq!(b.bits(), TAG_BITS + 2);
        b.set(wb_key(1, 2), 255);
        assert_eq!(b.bits(), TAG_BITS + 2 + TAG_BITS + 8);
    }

    #[test]
    fn capacity_defaults() {
        assert_eq!(default_capacity_bits(3), 64);
        assert_eq!(default_capacity_bits(4), 64);
        assert_eq!(default_capacity_bits(5), 96);
        assert_eq!(default_capacity_bits(16), 128);
        assert_eq!(default_capacity_bits(17), 160);
    }
}
