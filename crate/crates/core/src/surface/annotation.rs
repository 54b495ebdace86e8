use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Placement, Policy, SlotCount, SurfaceError};

/// A random fingerprint value; only the low `width` bits are meaningful.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Differentia(u64);

impl Differentia {
    /// Masks `value` down to `width` bits.
    #[inline]
    pub fn new(value: u64, width: u8) -> Self {
        Self(value & Self::mask(width))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, width: u8) -> Self {
        Self::new(rng.random(), width)
    }

    #[inline]
    pub fn mask(width: u8) -> u64 {
        if width >= 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }
}

/// Width of the generation counter stored alongside a surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterWidth {
    U16,
    U32,
}

impl CounterWidth {
    /// Largest representable counter value.
    pub fn capacity(self) -> u64 {
        match self {
            CounterWidth::U16 => u64::from(u16::MAX),
            CounterWidth::U32 => u64::from(u32::MAX),
        }
    }

    pub fn bytes(self) -> usize {
        match self {
            CounterWidth::U16 => 2,
            CounterWidth::U32 => 4,
        }
    }
}

/// A generation counter plus a fixed-width surface of differentiae.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    policy: Policy,
    slots: SlotCount,
    differentia_bits: u8,
    counter_width: CounterWidth,
    counter: u64,
    values: Vec<u64>,
}

impl Annotation {
    pub fn new(
        policy: Policy,
        slots: SlotCount,
        differentia_bits: u8,
        counter_width: CounterWidth,
    ) -> Result<Self, SurfaceError> {
        policy.check_slots(slots)?;
        if !(1..=64).contains(&differentia_bits) {
            return Err(SurfaceError::InvalidDifferentiaWidth(differentia_bits));
        }
        Ok(Self {
            policy,
            slots,
            differentia_bits,
            counter_width,
            counter: 0,
            values: vec![0; slots.get()],
        })
    }

    /// Rebuilds an annotation from raw parts, as read back from a genome.
    pub(crate) fn from_parts(
        policy: Policy,
        slots: SlotCount,
        differentia_bits: u8,
        counter_width: CounterWidth,
        counter: u64,
        values: Vec<u64>,
    ) -> Self {
        debug_assert_eq!(values.len(), slots.get());
        Self {
            policy,
            slots,
            differentia_bits,
            counter_width,
            counter,
            values,
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn slots(&self) -> SlotCount {
        self.slots
    }

    pub fn differentia_bits(&self) -> u8 {
        self.differentia_bits
    }

    pub fn counter_width(&self) -> CounterWidth {
        self.counter_width
    }

    /// Number of deposits so far; ranks `0..counter` have been generated.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Raw slot contents, including never-written slots.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Writes `d` for rank `counter` and advances the counter. At most one
    /// slot changes.
    pub fn deposit(&mut self, d: Differentia) -> Result<Placement, SurfaceError> {
        let capacity = self.counter_width.capacity();
        if self.counter >= capacity {
            return Err(SurfaceError::CounterOverflow { capacity });
        }
        let placement = self.policy.site(self.counter, self.slots);
        if let Placement::Slot(slot) = placement {
            self.values[slot] = d.value() & Differentia::mask(self.differentia_bits);
        }
        self.counter += 1;
        Ok(placement)
    }

    pub fn deposit_random<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<Placement, SurfaceError> {
        let d = Differentia::random(rng, self.differentia_bits);
        self.deposit(d)
    }

    pub fn resident_rank(&self, slot: usize) -> Option<u64> {
        self.policy.resident_rank(self.slots, slot, self.counter)
    }

    /// Resident `(rank, differentia)` pairs, ascending by rank.
    pub fn to_records(&self) -> RecordSet {
        let mut entries: Vec<(u64, u64)> = (0..self.slots.get())
            .filter_map(|slot| self.resident_rank(slot).map(|r| (r, self.values[slot])))
            .collect();
        entries.sort_unstable_by_key(|&(r, _)| r);
        RecordSet {
            entries,
            counter: self.counter,
        }
    }
}

/// Retained `(rank, differentia)` pairs extracted from an annotation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RecordSet {
    entries: Vec<(u64, u64)>,
    counter: u64,
}

impl RecordSet {
    /// Ranks must be strictly ascending and below `counter`.
    pub fn new(entries: Vec<(u64, u64)>, counter: u64) -> Result<Self, SurfaceError> {
        if let Some(w) = entries.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(SurfaceError::InvalidRecords(format!(
                "ranks {} and {} out of order",
                w[0].0, w[1].0
            )));
        }
        if let Some(&(r, _)) = entries.last() {
            if r >= counter {
                return Err(SurfaceError::InvalidRecords(format!(
                    "rank {r} not below counter {counter}"
                )));
            }
        }
        Ok(Self { entries, counter })
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ranks(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|&(r, _)| r)
    }

    pub fn differentia_at(&self, rank: u64) -> Option<u64> {
        self.entries
            .binary_search_by_key(&rank, |&(r, _)| r)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Keeps only the ranks accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(u64) -> bool) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|&(r, _)| keep(r))
                .collect(),
            counter: self.counter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn annotation(policy: Policy, slots: usize) -> Annotation {
        Annotation::new(policy, SlotCount::new(slots).unwrap(), 8, CounterWidth::U32).unwrap()
    }

    #[test]
    fn first_deposit_goes_to_slot_zero() {
        for policy in Policy::ALL {
            let mut a = annotation(policy, 16);
            assert_eq!(
                a.deposit(Differentia::new(0xAB, 8)).unwrap(),
                Placement::Slot(0)
            );
            assert_eq!(a.counter(), 1);
            assert_eq!(a.values()[0], 0xAB);
            assert_eq!(a.to_records().entries(), &[(0, 0xAB)]);
        }
    }

    #[test]
    fn steady_s4_after_seven_deposits() {
        let mut a = annotation(Policy::Steady, 4);
        for r in 0..7 {
            a.deposit(Differentia::new(r, 8)).unwrap();
        }
        // Differentia value equals its rank here.
        assert_eq!(a.values(), &[0, 4, 2, 6]);
    }

    #[test]
    fn steady_s4_records_at_thirteen() {
        let mut a = annotation(Policy::Steady, 4);
        for r in 0..13 {
            a.deposit(Differentia::new(r, 8)).unwrap();
        }
        let ranks: Vec<u64> = a.to_records().ranks().collect();
        assert_eq!(ranks, vec![0, 4, 8, 12]);
    }

    #[test]
    fn tilted_s8_overflow_slot_gets_rank_seven() {
        let mut a = annotation(Policy::Tilted, 8);
        for r in 0..8 {
            a.deposit(Differentia::new(100 + r, 8)).unwrap();
        }
        assert_eq!(a.values()[1], 107);
    }

    #[test]
    fn empty_annotation_has_no_records() {
        assert!(annotation(Policy::Tilted, 8).to_records().is_empty());
    }

    #[test]
    fn counter_overflow_is_an_error() {
        let mut a = Annotation::new(
            Policy::Tilted,
            SlotCount::new(8).unwrap(),
            1,
            CounterWidth::U16,
        )
        .unwrap();
        a.counter = u64::from(u16::MAX) - 1;
        a.deposit(Differentia::new(1, 1)).unwrap();
        assert_eq!(
            a.deposit(Differentia::new(1, 1)),
            Err(SurfaceError::CounterOverflow { capacity: 65535 })
        );
        assert_eq!(a.counter(), 65535);
    }

    #[test]
    fn deposits_touch_at_most_one_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for policy in Policy::ALL {
            let mut a = annotation(policy, 32);
            for _ in 0..2000 {
                let before = a.values().to_vec();
                a.deposit_random(&mut rng).unwrap();
                let changed = before
                    .iter()
                    .zip(a.values())
                    .filter(|(x, y)| x != y)
                    .count();
                assert!(changed <= 1);
            }
        }
    }

    #[test]
    fn differentia_masks_to_width() {
        assert_eq!(Differentia::new(0x1FF, 8).value(), 0xFF);
        assert_eq!(Differentia::new(0b10, 1).value(), 0);
        assert_eq!(Differentia::mask(64), u64::MAX);
    }

    #[test]
    fn record_set_validation() {
        assert!(RecordSet::new(vec![(0, 1), (4, 0)], 5).is_ok());
        assert!(RecordSet::new(vec![(4, 1), (0, 0)], 5).is_err());
        assert!(RecordSet::new(vec![(0, 1), (0, 0)], 5).is_err());
        assert!(RecordSet::new(vec![(0, 1), (5, 0)], 5).is_err());
    }
}
