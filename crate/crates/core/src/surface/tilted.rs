//! Tilted policy: hanoi-banded ring.
//!
//! Slot 0 keeps rank 0 forever. Ranks with hanoi value `h < H`, where
//! `H = (S - 2) / 2`, alternate between the two slots `2 + 2h` and
//! `3 + 2h`, so the two most recent occurrences of each hanoi value are
//! retained. Ranks with `h >= H` share the overflow slot 1. Occurrences of
//! `h` recur every `2^(h+1)` ranks, which makes retained gaps roughly
//! proportional to their age while `floor(log2 N) < H`.

use super::{Placement, SlotCount};

/// Ruler sequence: trailing zero bits of `rank + 1`.
#[inline]
pub fn hanoi_value(rank: u64) -> u32 {
    rank.trailing_ones()
}

#[inline]
fn band_count(slots: SlotCount) -> u32 {
    ((slots.get() - 2) / 2) as u32
}

/// Never discards.
pub fn tilted_site(rank: u64, slots: SlotCount) -> Placement {
    if rank == 0 {
        return Placement::Slot(0);
    }
    let h = hanoi_value(rank);
    if h >= band_count(slots) {
        return Placement::Slot(1);
    }
    // rank + 1 = (2i + 1) * 2^h for occurrence index i.
    let occurrence = (u128::from(rank) + 1) >> (h + 1);
    Placement::Slot(2 + 2 * h as usize + (occurrence & 1) as usize)
}

pub fn tilted_resident_rank(slot: usize, n: u64, slots: SlotCount) -> Option<u64> {
    if n == 0 {
        return None;
    }
    let bands = band_count(slots);
    match slot {
        0 => Some(0),
        1 => {
            // Largest r < n with 2^H dividing r + 1.
            let m = n.checked_shr(bands).unwrap_or(0);
            (m > 0).then(|| (m << bands) - 1)
        }
        _ => {
            let h = ((slot - 2) / 2) as u32;
            let parity = ((slot - 2) % 2) as u64;
            if h >= 63 {
                return None;
            }
            let first = (1u64 << h) - 1;
            if n <= first {
                return None;
            }
            let latest = (n - 1 - first) >> (h + 1);
            let occurrence = if latest & 1 == parity {
                latest
            } else {
                latest.checked_sub(1)?
            };
            // Occurrence 0 of hanoi value 0 is rank 0, which lives in slot 0.
            if h == 0 && occurrence == 0 {
                return None;
            }
            Some(first + (occurrence << (h + 1)))
        }
    }
}
