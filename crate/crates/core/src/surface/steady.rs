//! Steady policy: epoch doubling.
//!
//! With `s = log2(S)`, epoch `e >= 1` covers ranks of bit length `s + e`.
//! During that epoch only multiples of `2^e` are kept; each one evicts an
//! odd multiple of `2^(e-1)` from the previous epoch. Everything else is
//! discarded, which is the same as storing it and evicting it at once.
//! After `N` deposits every gap between retained ranks is at most
//! `2^max(0, bit_len(N - 1) - s)`.

use super::{bit_len, Placement, SlotCount};

/// Rank `T` is stored iff `T == 0` or its odd part is below `S`. The slot is
/// found by contracting `T` onto the rank it evicts until it falls inside
/// the fill phase, where slot equals rank.
pub fn steady_site(rank: u64, slots: SlotCount) -> Placement {
    if rank == 0 {
        return Placement::Slot(0);
    }
    let size = slots.get() as u64;
    let odd_part = rank >> rank.trailing_zeros();
    if odd_part >= size {
        return Placement::Discard;
    }
    let s = slots.log2();
    let mut t = rank;
    while t >= size {
        let e = bit_len(t) - s;
        let i = (t - (1u64 << (s + e - 1))) >> e;
        t = (2 * i + 1) << (e - 1);
    }
    Placement::Slot(t as usize)
}

/// Walks the eviction chain forward from the fill-phase rank `slot`. Rank
/// `o * 2^c` (odd `o`) is evicted by `2^(s+c) + ((o-1)/2) * 2^(c+1)`, so
/// the chain grows geometrically and the walk takes `O(log n)` steps.
pub fn steady_resident_rank(slot: usize, n: u64, slots: SlotCount) -> Option<u64> {
    let mut rank = slot as u64;
    if rank >= n {
        return None;
    }
    if rank == 0 {
        return Some(0);
    }
    let s = slots.log2();
    loop {
        let c = rank.trailing_zeros();
        let odd = rank >> c;
        // s + c <= 30 + 63, so the successor always fits in u128.
        let next = (1u128 << (s + c)) + (u128::from((odd - 1) / 2) << (c + 1));
        if next >= u128::from(n) {
            return Some(rank);
        }
        rank = next as u64;
    }
}
