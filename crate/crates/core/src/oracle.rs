//! Brute-force ground truth for surface behaviour.
//!
//! Everything here replays deposits one rank at a time and never calls the
//! closed-form resident-rank functions, so it can be used to check them.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::surface::{bit_len, Placement, Policy, SlotCount};

/// Slot -> resident rank, from naive replay.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RetainedMap {
    slots: BTreeMap<usize, u64>,
}

impl RetainedMap {
    pub fn get(&self, slot: usize) -> Option<u64> {
        self.slots.get(&slot).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.slots.iter().map(|(&s, &r)| (s, r))
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Retained ranks in ascending order.
    pub fn ranks(&self) -> Vec<u64> {
        let mut ranks: Vec<u64> = self.slots.values().copied().collect();
        ranks.sort_unstable();
        ranks
    }
}

/// Incremental replay of one surface, deposit by deposit.
#[derive(Clone, Debug)]
pub struct Replayer {
    policy: Policy,
    slots: SlotCount,
    resident: Vec<Option<u64>>,
    n: u64,
}

impl Replayer {
    pub fn new(policy: Policy, slots: SlotCount) -> Self {
        Self {
            policy,
            slots,
            resident: vec![None; slots.get()],
            n: 0,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Deposits rank `n` and returns where it went.
    pub fn advance(&mut self) -> Placement {
        let placement = self.policy.site(self.n, self.slots);
        if let Placement::Slot(s) = placement {
            self.resident[s] = Some(self.n);
        }
        self.n += 1;
        placement
    }

    pub fn advance_to(&mut self, n: u64) {
        while self.n < n {
            self.advance();
        }
    }

    pub fn resident(&self) -> &[Option<u64>] {
        &self.resident
    }

    pub fn retained(&self) -> RetainedMap {
        RetainedMap {
            slots: self
                .resident
                .iter()
                .enumerate()
                .filter_map(|(s, r)| r.map(|r| (s, r)))
                .collect(),
        }
    }

    fn sorted_ranks(&self, out: &mut Vec<u64>) {
        out.clear();
        out.extend(self.resident.iter().flatten());
        out.sort_unstable();
    }
}

/// Replays deposits `0..n` and reports what each slot holds. O(n).
pub fn replay_retained(policy: Policy, slots: SlotCount, n: u64) -> RetainedMap {
    let mut replayer = Replayer::new(policy, slots);
    replayer.advance_to(n);
    replayer.retained()
}

/// Replays an explicit differentia stream (`deposits[r]` is rank `r`'s
/// value) and returns the retained `(rank, differentia)` pairs by rank.
pub fn replay_records(policy: Policy, slots: SlotCount, deposits: &[u64]) -> Vec<(u64, u64)> {
    let mut held: Vec<Option<(u64, u64)>> = vec![None; slots.get()];
    for (rank, &value) in deposits.iter().enumerate() {
        if let Placement::Slot(s) = policy.site(rank as u64, slots) {
            held[s] = Some((rank as u64, value));
        }
    }
    let mut records: Vec<(u64, u64)> = held.into_iter().flatten().collect();
    records.sort_unstable();
    records
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "{policy} S={slots}: closed form says slot {slot} holds {closed:?} at N={n}, replay says {replay:?}"
    )]
    Mismatch {
        policy: Policy,
        slots: usize,
        n: u64,
        slot: usize,
        closed: Option<u64>,
        replay: Option<u64>,
    },
    #[error("{0}")]
    Gap(GapViolation),
    #[error("{policy} S={slots}: rank 0 not retained at N={n}")]
    RankZeroLost {
        policy: Policy,
        slots: usize,
        n: u64,
    },
}

/// Checks closed-form resident ranks against replay at every `n` yielded by
/// `ns`, which must be ascending.
pub fn check_equivalence(
    policy: Policy,
    slots: SlotCount,
    ns: impl IntoIterator<Item = u64>,
) -> Result<usize, OracleError> {
    let mut replayer = Replayer::new(policy, slots);
    let mut checked = 0;
    for n in ns {
        assert!(n >= replayer.n(), "check_equivalence needs ascending n");
        replayer.advance_to(n);
        for (slot, replay) in replayer.resident().iter().enumerate() {
            let closed = policy.resident_rank(slots, slot, n);
            if closed != *replay {
                return Err(OracleError::Mismatch {
                    policy,
                    slots: slots.get(),
                    n,
                    slot,
                    closed,
                    replay: *replay,
                });
            }
        }
        checked += 1;
    }
    Ok(checked)
}

/// One adjacent pair `r < r_next` in `retained ∪ {N}` whose gap breaks the
/// policy's bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapViolation {
    pub policy: Policy,
    pub slots: usize,
    pub n: u64,
    pub r: u64,
    pub r_next: u64,
    pub bound: u64,
    /// Tilted only: `floor(log2 N) >= H`, where the overflow slot is shared
    /// and the recency bound is not expected to hold.
    pub clamp_regime: bool,
}

impl fmt::Display for GapViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} S={}: gap {}..{} = {} exceeds bound {} at N={}{}",
            self.policy,
            self.slots,
            self.r,
            self.r_next,
            self.r_next - self.r,
            self.bound,
            self.n,
            if self.clamp_regime {
                " (clamp regime)"
            } else {
                ""
            }
        )
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub policy: Policy,
    pub slots: usize,
    pub n_max: u64,
    /// Largest `gap / bound` seen. For hybrid, which has no bound, this is
    /// the largest raw gap.
    pub worst_ratio: f64,
    pub worst_gap: u64,
    pub worst_n: u64,
    pub violation_count: usize,
    pub clamp_violation_count: usize,
    /// First violations found, capped at [`GapReport::KEPT`].
    pub violations: Vec<GapViolation>,
    pub rank_zero_lost: Option<u64>,
}

impl GapReport {
    pub const KEPT: usize = 32;

    /// Violations outside the tilted clamp regime.
    pub fn strict_violations(&self) -> usize {
        self.violation_count - self.clamp_violation_count
    }

    /// Fails on the first violation, or only on non-clamp ones when
    /// `allow_clamp` is set.
    pub fn into_result(self, allow_clamp: bool) -> Result<GapReport, OracleError> {
        if let Some(n) = self.rank_zero_lost {
            return Err(OracleError::RankZeroLost {
                policy: self.policy,
                slots: self.slots,
                n,
            });
        }
        let relevant = if allow_clamp {
            self.strict_violations()
        } else {
            self.violation_count
        };
        if relevant == 0 {
            return Ok(self);
        }
        let first = self
            .violations
            .iter()
            .find(|v| !(allow_clamp && v.clamp_regime))
            .unwrap_or(&self.violations[0])
            .clone();
        Err(OracleError::Gap(first))
    }
}

/// Replays `1..=n_max` and checks the gap bound of `policy` at every `N`:
///
/// - steady: gaps <= `2^max(0, bit_len(N-1) - log2 S)`
/// - tilted: gap `r' - r` <= `max(4, N - r')`
/// - hybrid: no bound; only rank-0 retention is checked.
///
/// All policies must keep rank 0 for every `N >= 1`.
pub fn check_gap_bounds(policy: Policy, slots: SlotCount, n_max: u64) -> GapReport {
    let s = slots.log2();
    let bands = ((slots.get() - 2) / 2) as u32;
    let mut report = GapReport {
        policy,
        slots: slots.get(),
        n_max,
        worst_ratio: 0.0,
        worst_gap: 0,
        worst_n: 0,
        violation_count: 0,
        clamp_violation_count: 0,
        violations: Vec::new(),
        rank_zero_lost: None,
    };
    let mut replayer = Replayer::new(policy, slots);
    let mut ranks = Vec::with_capacity(slots.get() + 1);
    for n in 1..=n_max {
        replayer.advance();
        replayer.sorted_ranks(&mut ranks);
        if ranks.first() != Some(&0) && report.rank_zero_lost.is_none() {
            report.rank_zero_lost = Some(n);
        }
        ranks.push(n);
        let clamp = policy == Policy::Tilted && (63 - n.leading_zeros()) >= bands;
        for w in ranks.windows(2) {
            let (r, r_next) = (w[0], w[1]);
            let gap = r_next - r;
            let bound = match policy {
                Policy::Steady => 1u64 << bit_len(n - 1).saturating_sub(s),
                Policy::Tilted => 4.max(n - r_next),
                Policy::Hybrid => u64::MAX,
            };
            let ratio = if policy == Policy::Hybrid {
                gap as f64
            } else {
                gap as f64 / bound as f64
            };
            if ratio > report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_gap = gap;
                report.worst_n = n;
            }
            if gap > bound {
                report.violation_count += 1;
                if clamp {
                    report.clamp_violation_count += 1;
                }
                if report.violations.len() < GapReport::KEPT {
                    report.violations.push(GapViolation {
                        policy,
                        slots: slots.get(),
                        n,
                        r,
                        r_next,
                        bound,
                        clamp_regime: clamp,
                    });
                }
            }
        }
    }
    report
}
