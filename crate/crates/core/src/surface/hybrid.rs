//! Hybrid policy: even ranks on a steady lower half, odd ranks on a tilted
//! upper half. Each half sees a logical rank stream at half resolution.

use super::{steady_resident_rank, steady_site, tilted_resident_rank, tilted_site};
use super::{Placement, SlotCount};

pub fn hybrid_site(rank: u64, slots: SlotCount) -> Placement {
    let half = slots.half();
    if rank.is_multiple_of(2) {
        steady_site(rank / 2, half)
    } else {
        match tilted_site(rank / 2, half) {
            Placement::Slot(s) => Placement::Slot(s + half.get()),
            Placement::Discard => Placement::Discard,
        }
    }
}

pub fn hybrid_resident_rank(slot: usize, n: u64, slots: SlotCount) -> Option<u64> {
    let half = slots.half();
    if slot < half.get() {
        // Even ranks below n: ceil(n / 2) logical deposits.
        steady_resident_rank(slot, n.div_ceil(2), half).map(|r| 2 * r)
    } else {
        tilted_resident_rank(slot - half.get(), n / 2, half).map(|r| 2 * r + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_examples_s16() {
        let slots = SlotCount::new(16).unwrap();
        assert_eq!(hybrid_site(0, slots), Placement::Slot(0));
        assert_eq!(hybrid_site(1, slots), Placement::Slot(8));
        // Logical steady rank 5 on an 8-slot half is still in its fill phase.
        assert_eq!(hybrid_site(10, slots), Placement::Slot(5));
    }

    #[test]
    fn resident_maps_back_to_physical_ranks() {
        let slots = SlotCount::new(16).unwrap();
        assert_eq!(hybrid_resident_rank(5, 11, slots), Some(10));
        assert_eq!(hybrid_resident_rank(5, 10, slots), None);
        assert_eq!(hybrid_resident_rank(8, 2, slots), Some(1));
        assert_eq!(hybrid_resident_rank(8, 1, slots), None);
    }
}
