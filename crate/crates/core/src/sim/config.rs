use serde::{Deserialize, Serialize};

use super::SimError;
use crate::surface::{GenomeLayout, HeaderKind, Policy, SlotCount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Edge PEs have two or three neighbors.
    Bounded,
    /// Wraps in both axes.
    Torus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    /// Genomes per PE.
    pub population: usize,
    /// Genomes per emigration buffer.
    pub send_capacity: usize,
    /// Genomes a receive buffer accumulates before it completes.
    pub recv_capacity: usize,
    pub topology: Topology,
    pub tournament_size: usize,
    /// Steps every PE executes before halting.
    pub generations: u64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: 3,
            height: 3,
            population: 32,
            send_capacity: 1,
            recv_capacity: 4,
            topology: Topology::Bounded,
            tournament_size: 5,
            generations: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Neutral,
    /// Only deleterious mutations.
    Purifying,
    /// Deleterious mutations plus rare beneficial ones.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Treatment {
    pub mode: Mode,
    pub deleterious_prob: f64,
    pub deleterious_sigma: f64,
    pub beneficial_prob: f64,
    pub beneficial_sigma: f64,
}

impl Default for Treatment {
    fn default() -> Self {
        Self::neutral()
    }
}

impl Treatment {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            deleterious_prob: 1.0 / 3.0,
            deleterious_sigma: 1.0,
            beneficial_prob: 0.003,
            beneficial_sigma: 1.0,
        }
    }

    pub fn neutral() -> Self {
        Self::new(Mode::Neutral)
    }
}

/// Serializable genome layout choice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub header: HeaderKind,
    pub policy: Policy,
    pub surface_slots: usize,
    pub differentia_bits: u8,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            header: HeaderKind::Tagged,
            policy: Policy::Tilted,
            surface_slots: 64,
            differentia_bits: 1,
        }
    }
}

impl LayoutConfig {
    pub fn fitness() -> Self {
        Self {
            header: HeaderKind::Fitness,
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<GenomeLayout, SimError> {
        Ok(GenomeLayout::new(
            self.header,
            self.policy,
            SlotCount::new(self.surface_slots)?,
            self.differentia_bits,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// Single thread, fixed PE order.
    Deterministic,
    /// Row bands of PEs on worker threads, exchanging messages.
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub treatment: Treatment,
    pub layout: LayoutConfig,
    pub scheduler: Scheduler,
    /// Worker threads for the parallel scheduler; 0 picks the host's count.
    pub threads: usize,
    pub track_perfect: bool,
    /// Also keep every deposited differentia in the tracker. Memory heavy.
    pub track_deposits: bool,
    /// Probability that a migrating genome is dropped in transit.
    pub loss_prob: f64,
    /// Immigrants that lag the receiving PE get the missing deposits on
    /// arrival, so every genome's counter equals its PE's generation.
    pub align_immigrant_counters: bool,
    /// When false, genomes carry no deposits (benchmark baseline).
    pub annotate: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            treatment: Treatment::default(),
            layout: LayoutConfig::default(),
            scheduler: Scheduler::Deterministic,
            threads: 0,
            track_perfect: false,
            track_deposits: false,
            loss_prob: 0.0,
            align_immigrant_counters: true,
            annotate: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<GenomeLayout, SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        let g = &self.grid;
        if g.width == 0 || g.height == 0 {
            return bad(format!("grid {}x{} has no PEs", g.width, g.height));
        }
        if g.width.checked_mul(g.height).is_none_or(|n| n > 1 << 24) {
            return bad("grid is too large".into());
        }
        if g.population == 0 {
            return bad("population must be at least 1".into());
        }
        if g.tournament_size == 0 {
            return bad("tournament size must be at least 1".into());
        }
        if g.send_capacity == 0 || g.recv_capacity == 0 {
            return bad("buffer capacities must be at least 1".into());
        }
        if g.send_capacity > g.recv_capacity {
            return bad(format!(
                "send capacity {} exceeds receive capacity {}",
                g.send_capacity, g.recv_capacity
            ));
        }
        if !g.recv_capacity.is_multiple_of(g.send_capacity) {
            return bad(format!(
                "receive capacity {} is not a multiple of send capacity {}",
                g.recv_capacity, g.send_capacity
            ));
        }
        let t = &self.treatment;
        for (name, p) in [
            ("deleterious_prob", t.deleterious_prob),
            ("beneficial_prob", t.beneficial_prob),
            ("loss_prob", self.loss_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} is not in [0, 1]"));
            }
        }
        for (name, s) in [
            ("deleterious_sigma", t.deleterious_sigma),
            ("beneficial_sigma", t.beneficial_sigma),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("{name} {s} must be finite and non-negative"));
            }
        }
        let layout = self.layout.build()?;
        if t.mode != Mode::Neutral && layout.header() == HeaderKind::Tagged {
            return bad(format!(
                "{:?} treatment needs a fitness field; use the fitness layout",
                t.mode
            ));
        }
        let capacity = layout.counter_width().capacity();
        if self.annotate && g.generations > capacity {
            return bad(format!(
                "{} generations overflow the {}-bit counter",
                g.generations,
                layout.counter_width().bytes() * 8
            ));
        }
        if self.track_perfect && self.scheduler == Scheduler::Parallel {
            return bad("perfect tracking needs the deterministic scheduler".into());
        }
        if self.track_deposits && !self.track_perfect {
            return bad("track_deposits requires track_perfect".into());
        }
        Ok(layout)
    }
}
