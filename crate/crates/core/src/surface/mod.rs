//! Fixed-width surface annotations.
//!
//! A surface is a buffer of `S` slots (a power of two). The differentia
//! generated at rank `T` is written to the slot chosen by the active
//! [`Policy`], overwriting whatever was there. Old differentiae are thereby
//! pruned implicitly, and the rank held by any slot can be recomputed from
//! the slot index and the deposit counter alone.

mod annotation;
mod genome;
mod hybrid;
mod steady;
mod tilted;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotation::{Annotation, CounterWidth, Differentia, RecordSet};
pub use genome::{Genome, GenomeHeader, GenomeLayout, HeaderKind};
pub use hybrid::{hybrid_resident_rank, hybrid_site};
pub use steady::{steady_resident_rank, steady_site};
pub use tilted::{hanoi_value, tilted_resident_rank, tilted_site};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("slot count {0} is not a power of two >= 4")]
    InvalidSlotCount(usize),
    #[error("{policy} policy needs at least {min} slots, got {slots}")]
    TooFewSlots {
        policy: Policy,
        min: usize,
        slots: usize,
    },
    #[error("differentia width {0} is not in 1..=64")]
    InvalidDifferentiaWidth(u8),
    #[error("surface of {slots} x {bits}-bit differentiae does not fill whole bytes")]
    UnalignedSurface { slots: usize, bits: u8 },
    #[error("generation counter at capacity {capacity}")]
    CounterOverflow { capacity: u64 },
    #[error("expected {expected} genome bytes, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("genome header does not match layout {0}")]
    HeaderMismatch(String),
    #[error("invalid record set: {0}")]
    InvalidRecords(String),
    #[error("unknown policy `{0}` (expected steady, tilted, or hybrid)")]
    UnknownPolicy(String),
    #[error("malformed layout descriptor `{0}`")]
    BadDescriptor(String),
}

/// Number of slots in a surface. Always a power of two, at least 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotCount(u32);

impl SlotCount {
    pub fn new(slots: usize) -> Result<Self, SurfaceError> {
        if slots < 4 || !slots.is_power_of_two() || slots > (1 << 30) {
            return Err(SurfaceError::InvalidSlotCount(slots));
        }
        Ok(Self(slots as u32))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// `s = log2(S)`.
    #[inline]
    pub fn log2(self) -> u32 {
        self.0.trailing_zeros()
    }

    /// Half of this slot count. Callers guarantee the result is still >= 4.
    #[inline]
    pub(crate) fn half(self) -> Self {
        debug_assert!(self.0 >= 8);
        Self(self.0 / 2)
    }
}

impl fmt::Display for SlotCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a rank's differentia goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    Slot(usize),
    /// The rank is intentionally not stored.
    Discard,
}

impl Placement {
    pub fn slot(self) -> Option<usize> {
        match self {
            Placement::Slot(s) => Some(s),
            Placement::Discard => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Retained ranks spread evenly over all elapsed history.
    Steady,
    /// Retained ranks concentrated toward the present.
    Tilted,
    /// Even ranks on a steady half-surface, odd ranks on a tilted one.
    Hybrid,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Steady, Policy::Tilted, Policy::Hybrid];

    pub fn min_slots(self) -> usize {
        match self {
            Policy::Steady | Policy::Tilted => 4,
            Policy::Hybrid => 8,
        }
    }

    pub fn check_slots(self, slots: SlotCount) -> Result<(), SurfaceError> {
        if slots.get() < self.min_slots() {
            return Err(SurfaceError::TooFewSlots {
                policy: self,
                min: self.min_slots(),
                slots: slots.get(),
            });
        }
        Ok(())
    }

    /// Slot assignment for `rank`. A pure function of `(policy, slots, rank)`.
    #[inline]
    pub fn site(self, rank: u64, slots: SlotCount) -> Placement {
        match self {
            Policy::Steady => steady_site(rank, slots),
            Policy::Tilted => tilted_site(rank, slots),
            Policy::Hybrid => hybrid_site(rank, slots),
        }
    }

    /// Rank currently held by `slot` after `n` deposits, if any.
    #[inline]
    pub fn resident_rank(self, slots: SlotCount, slot: usize, n: u64) -> Option<u64> {
        debug_assert!(slot < slots.get());
        match self {
            Policy::Steady => steady_resident_rank(slot, n, slots),
            Policy::Tilted => tilted_resident_rank(slot, n, slots),
            Policy::Hybrid => hybrid_resident_rank(slot, n, slots),
        }
    }

    /// All `(slot, rank)` pairs resident after `n` deposits, by slot.
    pub fn resident_map(self, slots: SlotCount, n: u64) -> Vec<(usize, u64)> {
        (0..slots.get())
            .filter_map(|slot| self.resident_rank(slots, slot, n).map(|r| (slot, r)))
            .collect()
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Steady => "steady",
            Policy::Tilted => "tilted",
            Policy::Hybrid => "hybrid",
        })
    }
}

impl FromStr for Policy {
    type Err = SurfaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "steady" => Ok(Policy::Steady),
            "tilted" => Ok(Policy::Tilted),
            "hybrid" => Ok(Policy::Hybrid),
            _ => Err(SurfaceError::UnknownPolicy(s.to_string())),
        }
    }
}

/// Number of significant bits; `bit_len(0) == 0`.
#[inline]
pub fn bit_len(x: u64) -> u32 {
    64 - x.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_count_validation() {
        assert!(SlotCount::new(4).is_ok());
        assert!(SlotCount::new(64).is_ok());
        assert_eq!(SlotCount::new(2), Err(SurfaceError::InvalidSlotCount(2)));
        assert_eq!(SlotCount::new(48), Err(SurfaceError::InvalidSlotCount(48)));
        assert_eq!(SlotCount::new(64).unwrap().log2(), 6);
    }

    #[test]
    fn hybrid_needs_eight_slots() {
        let four = SlotCount::new(4).unwrap();
        assert!(Policy::Steady.check_slots(four).is_ok());
        assert!(Policy::Hybrid.check_slots(four).is_err());
    }

    #[test]
    fn rank_zero_lands_in_slot_zero_for_every_policy() {
        for policy in Policy::ALL {
            for s in [8, 16, 64] {
                let slots = SlotCount::new(s).unwrap();
                assert_eq!(policy.site(0, slots), Placement::Slot(0), "{policy} S={s}");
            }
        }
    }

    #[test]
    fn policy_parse_roundtrip() {
        for p in Policy::ALL {
            assert_eq!(p.to_string().parse::<Policy>().unwrap(), p);
        }
        assert!("column".parse::<Policy>().is_err());
    }

    #[test]
    fn bit_len_edges() {
        assert_eq!(bit_len(0), 0);
        assert_eq!(bit_len(1), 1);
        assert_eq!(bit_len(12), 4);
        assert_eq!(bit_len(u64::MAX), 64);
    }
}
