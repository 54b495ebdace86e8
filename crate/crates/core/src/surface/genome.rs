//! Fixed-length genome byte layouts.
//!
//! | layout  | bytes 0..  | counter      | surface          |
//! |---------|------------|--------------|------------------|
//! | tagged  | u16 tag    | u16 at 2..4  | 4..4+S*w/8       |
//! | fitness | f32 fitness| u32 at 4..8  | 8..8+S*w/8       |
//!
//! Multi-byte fields are little-endian. Surface slot `k` starts at bit
//! `k*w mod 8` of surface byte `k*w / 8`, least-significant bit first. The
//! presets are [`GenomeLayout::tagged_preset`] (96 bits) and
//! [`GenomeLayout::fitness_preset`] (128 bits), both with a tilted 64 x 1-bit
//! surface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Annotation, CounterWidth, Differentia, Placement, Policy, SlotCount, SurfaceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeaderKind {
    /// 16-bit founder tag, 16-bit counter.
    Tagged,
    /// 32-bit float fitness, 32-bit counter.
    Fitness,
}

impl HeaderKind {
    fn counter_width(self) -> CounterWidth {
        match self {
            HeaderKind::Tagged => CounterWidth::U16,
            HeaderKind::Fitness => CounterWidth::U32,
        }
    }

    fn counter_offset(self) -> usize {
        match self {
            HeaderKind::Tagged => 2,
            HeaderKind::Fitness => 4,
        }
    }

    fn surface_offset(self) -> usize {
        self.counter_offset() + self.counter_width().bytes()
    }
}

impl fmt::Display for HeaderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeaderKind::Tagged => "tagged",
            HeaderKind::Fitness => "fitness",
        })
    }
}

impl FromStr for HeaderKind {
    type Err = SurfaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tagged" => Ok(HeaderKind::Tagged),
            "fitness" => Ok(HeaderKind::Fitness),
            _ => Err(SurfaceError::BadDescriptor(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenomeHeader {
    FounderTag(u16),
    Fitness(f32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    pub header: GenomeHeader,
    pub annotation: Annotation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenomeLayout {
    header: HeaderKind,
    policy: Policy,
    slots: SlotCount,
    differentia_bits: u8,
}

impl GenomeLayout {
    pub fn new(
        header: HeaderKind,
        policy: Policy,
        slots: SlotCount,
        differentia_bits: u8,
    ) -> Result<Self, SurfaceError> {
        policy.check_slots(slots)?;
        if !(1..=64).contains(&differentia_bits) {
            return Err(SurfaceError::InvalidDifferentiaWidth(differentia_bits));
        }
        if !(slots.get() * differentia_bits as usize).is_multiple_of(8) {
            return Err(SurfaceError::UnalignedSurface {
                slots: slots.get(),
                bits: differentia_bits,
            });
        }
        Ok(Self {
            header,
            policy,
            slots,
            differentia_bits,
        })
    }

    /// 96-bit layout: founder tag, 16-bit counter, tilted 64 x 1-bit surface.
    pub fn tagged_preset() -> Self {
        Self::new(HeaderKind::Tagged, Policy::Tilted, SlotCount(64), 1).unwrap()
    }

    /// 128-bit layout: f32 fitness, 32-bit counter, tilted 64 x 1-bit surface.
    pub fn fitness_preset() -> Self {
        Self::new(HeaderKind::Fitness, Policy::Tilted, SlotCount(64), 1).unwrap()
    }

    pub fn header(&self) -> HeaderKind {
        self.header
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
        self.header.counter_width()
    }

    pub fn surface_bytes(&self) -> usize {
        self.slots.get() * self.differentia_bits as usize / 8
    }

    pub fn byte_len(&self) -> usize {
        self.header.surface_offset() + self.surface_bytes()
    }

    /// Compact text form, e.g. `tagged/tilted/64x1`.
    pub fn descriptor(&self) -> String {
        format!(
            "{}/{}/{}x{}",
            self.header, self.policy, self.slots, self.differentia_bits
        )
    }

    pub fn parse_descriptor(s: &str) -> Result<Self, SurfaceError> {
        let bad = || SurfaceError::BadDescriptor(s.to_string());
        let mut parts = s.trim().split('/');
        let (Some(header), Some(policy), Some(surface), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let (slots, bits) = surface.split_once('x').ok_or_else(bad)?;
        let slots: usize = slots.parse().map_err(|_| bad())?;
        let bits: u8 = bits.parse().map_err(|_| bad())?;
        Self::new(
            header.parse()?,
            policy.parse()?,
            SlotCount::new(slots)?,
            bits,
        )
    }

    fn check_len(&self, bytes: &[u8]) -> Result<(), SurfaceError> {
        if bytes.len() != self.byte_len() {
            return Err(SurfaceError::WrongLength {
                expected: self.byte_len(),
                actual: bytes.len(),
            });
        }
        Ok(())
    }

    // Raw accessors. These expect `genome.len() == self.byte_len()`.

    #[inline]
    pub fn counter(&self, genome: &[u8]) -> u64 {
        let at = self.header.counter_offset();
        match self.counter_width() {
            CounterWidth::U16 => u64::from(u16::from_le_bytes([genome[at], genome[at + 1]])),
            CounterWidth::U32 => {
                u64::from(u32::from_le_bytes(genome[at..at + 4].try_into().unwrap()))
            }
        }
    }

    #[inline]
    pub fn set_counter(&self, genome: &mut [u8], value: u64) {
        let at = self.header.counter_offset();
        match self.counter_width() {
            CounterWidth::U16 => genome[at..at + 2].copy_from_slice(&(value as u16).to_le_bytes()),
            CounterWidth::U32 => genome[at..at + 4].copy_from_slice(&(value as u32).to_le_bytes()),
        }
    }

    pub fn founder_tag(&self, genome: &[u8]) -> Option<u16> {
        match self.header {
            HeaderKind::Tagged => Some(u16::from_le_bytes([genome[0], genome[1]])),
            HeaderKind::Fitness => None,
        }
    }

    /// Stored fitness; tagged genomes carry none and evaluate to 0.
    #[inline]
    pub fn fitness(&self, genome: &[u8]) -> f32 {
        match self.header {
            HeaderKind::Tagged => 0.0,
            HeaderKind::Fitness => f32::from_le_bytes(genome[0..4].try_into().unwrap()),
        }
    }

    /// No-op for tagged genomes.
    #[inline]
    pub fn set_fitness(&self, genome: &mut [u8], fitness: f32) {
        if self.header == HeaderKind::Fitness {
            genome[0..4].copy_from_slice(&fitness.to_le_bytes());
        }
    }

    #[inline]
    pub fn differentia(&self, genome: &[u8], slot: usize) -> u64 {
        let surface = &genome[self.header.surface_offset()..];
        let w = self.differentia_bits as usize;
        match w {
            1 => u64::from((surface[slot / 8] >> (slot % 8)) & 1),
            8 => u64::from(surface[slot]),
            _ => {
                let mut value = 0u64;
                for j in 0..w {
                    let bit = slot * w + j;
                    value |= u64::from((surface[bit / 8] >> (bit % 8)) & 1) << j;
                }
                value
            }
        }
    }

    #[inline]
    pub fn set_differentia(&self, genome: &mut [u8], slot: usize, value: u64) {
        let offset = self.header.surface_offset();
        let surface = &mut genome[offset..];
        let w = self.differentia_bits as usize;
        match w {
            1 => {
                let mask = 1u8 << (slot % 8);
                if value & 1 == 1 {
                    surface[slot / 8] |= mask;
                } else {
                    surface[slot / 8] &= !mask;
                }
            }
            8 => surface[slot] = value as u8,
            _ => {
                for j in 0..w {
                    let bit = slot * w + j;
                    let mask = 1u8 << (bit % 8);
                    if (value >> j) & 1 == 1 {
                        surface[bit / 8] |= mask;
                    } else {
                        surface[bit / 8] &= !mask;
                    }
                }
            }
        }
    }

    /// Deposits `value` at rank `counter` directly into genome bytes.
    #[inline]
    pub fn deposit(&self, genome: &mut [u8], value: u64) -> Result<Placement, SurfaceError> {
        let n = self.counter(genome);
        let capacity = self.counter_width().capacity();
        if n >= capacity {
            return Err(SurfaceError::CounterOverflow { capacity });
        }
        let placement = self.policy.site(n, self.slots);
        if let Placement::Slot(slot) = placement {
            self.set_differentia(
                genome,
                slot,
                value & Differentia::mask(self.differentia_bits),
            );
        }
        self.set_counter(genome, n + 1);
        Ok(placement)
    }

    /// Bytes for a generation-0 genome with an empty surface.
    pub fn founder(&self, header: GenomeHeader) -> Result<Vec<u8>, SurfaceError> {
        let annotation = Annotation::new(
            self.policy,
            self.slots,
            self.differentia_bits,
            self.counter_width(),
        )?;
        self.pack(&Genome { header, annotation })
    }

    pub fn annotation(&self, genome: &[u8]) -> Result<Annotation, SurfaceError> {
        self.check_len(genome)?;
        let values = (0..self.slots.get())
            .map(|slot| self.differentia(genome, slot))
            .collect();
        Ok(Annotation::from_parts(
            self.policy,
            self.slots,
            self.differentia_bits,
            self.counter_width(),
            self.counter(genome),
            values,
        ))
    }

    pub fn pack(&self, genome: &Genome) -> Result<Vec<u8>, SurfaceError> {
        let a = &genome.annotation;
        if a.policy() != self.policy
            || a.slots() != self.slots
            || a.differentia_bits() != self.differentia_bits
            || a.counter() > self.counter_width().capacity()
        {
            return Err(SurfaceError::HeaderMismatch(self.descriptor()));
        }
        let mut bytes = vec![0u8; self.byte_len()];
        match (self.header, genome.header) {
            (HeaderKind::Tagged, GenomeHeader::FounderTag(tag)) => {
                bytes[0..2].copy_from_slice(&tag.to_le_bytes())
            }
            (HeaderKind::Fitness, GenomeHeader::Fitness(f)) => {
                bytes[0..4].copy_from_slice(&f.to_le_bytes())
            }
            _ => return Err(SurfaceError::HeaderMismatch(self.descriptor())),
        }
        self.set_counter(&mut bytes, a.counter());
        for (slot, &v) in a.values().iter().enumerate() {
            self.set_differentia(&mut bytes, slot, v);
        }
        Ok(bytes)
    }

    pub fn unpack(&self, bytes: &[u8]) -> Result<Genome, SurfaceError> {
        self.check_len(bytes)?;
        let header = match self.header {
            HeaderKind::Tagged => {
                GenomeHeader::FounderTag(u16::from_le_bytes([bytes[0], bytes[1]]))
            }
            HeaderKind::Fitness => {
                GenomeHeader::Fitness(f32::from_le_bytes(bytes[0..4].try_into().unwrap()))
            }
        };
        Ok(Genome {
            header,
            annotation: self.annotation(bytes)?,
        })
    }

    pub fn to_hex(&self, genome: &[u8]) -> String {
        hex::encode(genome)
    }

    pub fn from_hex(&self, s: &str) -> Result<Vec<u8>, SurfaceError> {
        let bytes = hex::decode(s.trim()).map_err(|_| SurfaceError::WrongLength {
            expected: self.byte_len(),
            actual: s.len() / 2,
        })?;
        self.check_len(&bytes)?;
        Ok(bytes)
    }
}

impl fmt::Display for GenomeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // First genome of the published 3x3 validation dump (tagged layout).
    const DUMP: [u8; 12] = [
        0xF9, 0x02, 0x79, 0x00, 0x8D, 0x22, 0x4F, 0xF3, 0xD2, 0x78, 0xAD, 0xC7,
    ];

    #[test]
    fn preset_lengths() {
        assert_eq!(GenomeLayout::tagged_preset().byte_len(), 12);
        assert_eq!(GenomeLayout::fitness_preset().byte_len(), 16);
    }

    #[test]
    fn validation_dump_field_order() {
        let layout = GenomeLayout::tagged_preset();
        let g = layout.unpack(&DUMP).unwrap();
        assert_eq!(g.header, GenomeHeader::FounderTag(0x02F9));
        assert_eq!(g.annotation.counter(), 0x79);
        // Byte 4 = 0x8D = 0b1000_1101, read LSB first.
        let first: Vec<u64> = g.annotation.values()[..8].to_vec();
        assert_eq!(first, vec![1, 0, 1, 1, 0, 0, 0, 1]);
        assert_eq!(layout.pack(&g).unwrap(), DUMP.to_vec());
        assert_eq!(layout.to_hex(&DUMP), "f90279008d224ff3d278adc7");
    }

    #[test]
    fn all_zero_tagged_genome() {
        let layout = GenomeLayout::tagged_preset();
        let bytes = layout.founder(GenomeHeader::FounderTag(0)).unwrap();
        assert_eq!(bytes, vec![0u8; 12]);
    }

    #[test]
    fn wrong_length_rejected() {
        let layout = GenomeLayout::fitness_preset();
        assert_eq!(
            layout.unpack(&[0u8; 12]).unwrap_err(),
            SurfaceError::WrongLength {
                expected: 16,
                actual: 12
            }
        );
    }

    #[test]
    fn header_kind_must_match() {
        let layout = GenomeLayout::tagged_preset();
        let g = GenomeLayout::fitness_preset().unpack(&[0u8; 16]).unwrap();
        assert!(layout.pack(&g).is_err());
    }

    #[test]
    fn descriptor_roundtrip() {
        let layout = GenomeLayout::new(
            HeaderKind::Fitness,
            Policy::Steady,
            SlotCount::new(64).unwrap(),
            8,
        )
        .unwrap();
        assert_eq!(layout.descriptor(), "fitness/steady/64x8");
        assert_eq!(
            GenomeLayout::parse_descriptor("fitness/steady/64x8").unwrap(),
            layout
        );
        assert!(GenomeLayout::parse_descriptor("fitness/steady").is_err());
        assert!(GenomeLayout::parse_descriptor("fitness/steady/8x1").is_ok());
        assert!(GenomeLayout::parse_descriptor("fitness/steady/4x1").is_err());
    }

    #[test]
    fn raw_deposit_matches_annotation_deposit() {
        let layout = GenomeLayout::fitness_preset();
        let mut raw = layout.founder(GenomeHeader::Fitness(1.5)).unwrap();
        let mut typed = layout.annotation(&raw).unwrap();
        for r in 0..500u64 {
            let v = r.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 63;
            layout.deposit(&mut raw, v).unwrap();
            typed.deposit(Differentia::new(v, 1)).unwrap();
        }
        assert_eq!(layout.annotation(&raw).unwrap(), typed);
        assert_eq!(layout.fitness(&raw), 1.5);
    }

    #[test]
    fn tagged_counter_overflow() {
        let layout = GenomeLayout::tagged_preset();
        let mut raw = layout.founder(GenomeHeader::FounderTag(7)).unwrap();
        layout.set_counter(&mut raw, 65535);
        assert_eq!(
            layout.deposit(&mut raw, 1),
            Err(SurfaceError::CounterOverflow { capacity: 65535 })
        );
    }

    fn layouts() -> impl Strategy<Value = GenomeLayout> {
        (
            prop_oneof![Just(HeaderKind::Tagged), Just(HeaderKind::Fitness)],
            prop_oneof![
                Just(Policy::Steady),
                Just(Policy::Tilted),
                Just(Policy::Hybrid)
            ],
            prop_oneof![Just(8usize), Just(16), Just(64)],
            prop_oneof![Just(1u8), Just(2), Just(4), Just(8), Just(3)],
        )
            .prop_filter_map("aligned", |(h, p, s, w)| {
                GenomeLayout::new(h, p, SlotCount::new(s).unwrap(), w).ok()
            })
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(layout in layouts(), seed in any::<u64>()) {
            let mut state = seed;
            let bytes: Vec<u8> = (0..layout.byte_len())
                .map(|_| { state = crate::rng::splitmix64(state); state as u8 })
                .collect();
            let g = layout.unpack(&bytes).unwrap();
            prop_assert_eq!(layout.pack(&g).unwrap(), bytes);
        }
    }
}
