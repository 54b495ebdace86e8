use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Mode, SimConfig, Treatment};
use super::tracker::{LineageRecord, Tracker};
use crate::rng::pe_stream;
use crate::surface::{GenomeHeader, GenomeLayout, HeaderKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    pub fn opposite(self) -> Self {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
        }
    }
}

/// Migration state for one neighbor.
#[derive(Clone, Debug)]
pub struct Link {
    pub dir: Direction,
    pub neighbor: usize,
    /// Emigration buffer, `send_capacity` genomes.
    pub outbox: Vec<u8>,
    pub outbox_ids: Vec<u64>,
    /// Outbox is full and waiting for the transport to take it.
    pub send_pending: bool,
    pub send_complete: bool,
    /// Receive stage, up to `recv_capacity` genomes.
    pub inbox: Vec<u8>,
    pub inbox_ids: Vec<u64>,
    pub inbox_len: usize,
    pub recv_complete: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PeStats {
    /// Genomes copied from receive buffers into the population.
    pub imported: u64,
    /// Genomes handed to a neighbor's receive buffer.
    pub exported: u64,
    pub recv_cycles: u64,
    pub send_cycles: u64,
    pub dropped: u64,
}

/// Per-step constants shared by every PE.
#[derive(Clone, Copy, Debug)]
pub struct StepParams<'a> {
    pub layout: GenomeLayout,
    pub treatment: &'a Treatment,
    pub tournament_size: usize,
    pub align: bool,
    pub annotate: bool,
    deleterious: Normal<f64>,
    beneficial: Normal<f64>,
}

impl<'a> StepParams<'a> {
    pub fn new(config: &'a SimConfig, layout: GenomeLayout) -> Self {
        let t = &config.treatment;
        Self {
            layout,
            treatment: t,
            tournament_size: config.grid.tournament_size,
            align: config.align_immigrant_counters,
            annotate: config.annotate,
            deleterious: Normal::new(0.0, t.deleterious_sigma).expect("validated sigma"),
            beneficial: Normal::new(0.0, t.beneficial_sigma).expect("validated sigma"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pe {
    pub index: usize,
    pub x: usize,
    pub y: usize,
    pub generation: u64,
    pub rng: ChaCha8Rng,
    genome_len: usize,
    population: usize,
    pop: Vec<u8>,
    next: Vec<u8>,
    ids: Vec<u64>,
    next_ids: Vec<u64>,
    next_seq: u64,
    pub links: Vec<Link>,
    pub stats: PeStats,
}

impl Pe {
    /// Founder population: counter 0, empty surface, and either an
    /// independent random tag or zero fitness per genome. Emigration buffers
    /// start filled.
    pub fn new(
        index: usize,
        x: usize,
        y: usize,
        neighbors: &[(Direction, usize)],
        config: &SimConfig,
        layout: GenomeLayout,
        tracker: Option<&mut Tracker>,
    ) -> Self {
        let mut rng = pe_stream(config.grid.seed, index);
        let genome_len = layout.byte_len();
        let population = config.grid.population;
        let mut pop = Vec::with_capacity(population * genome_len);
        let tracking = tracker.is_some();
        let mut ids = Vec::new();
        let mut tracker = tracker;
        let mut next_seq = 0;
        for _ in 0..population {
            let header = match layout.header() {
                HeaderKind::Tagged => GenomeHeader::FounderTag(rng.random()),
                HeaderKind::Fitness => GenomeHeader::Fitness(0.0),
            };
            let genome = layout.founder(header).expect("validated layout");
            if let Some(t) = tracker.as_deref_mut() {
                let id = make_id(index, next_seq);
                next_seq += 1;
                t.record_birth(
                    id,
                    LineageRecord {
                        parent: None,
                        generation: 0,
                        pe: index as u32,
                        founder_tag: layout.founder_tag(&genome),
                        deposits: Vec::new(),
                    },
                );
                ids.push(id);
            }
            pop.extend_from_slice(&genome);
        }
        let send = config.grid.send_capacity;
        let recv = config.grid.recv_capacity;
        let links = neighbors
            .iter()
            .map(|&(dir, neighbor)| Link {
                dir,
                neighbor,
                outbox: vec![0; send * genome_len],
                outbox_ids: if tracking { vec![0; send] } else { Vec::new() },
                send_pending: false,
                send_complete: false,
                inbox: vec![0; recv * genome_len],
                inbox_ids: if tracking { vec![0; recv] } else { Vec::new() },
                inbox_len: 0,
                recv_complete: false,
            })
            .collect();
        let mut pe = Self {
            index,
            x,
            y,
            generation: 0,
            rng,
            genome_len,
            population,
            next: vec![0; pop.len()],
            pop,
            next_ids: ids.clone(),
            ids,
            next_seq,
            links,
            stats: PeStats::default(),
        };
        for k in 0..pe.links.len() {
            pe.fill_outbox(k);
        }
        pe
    }

    pub fn genome_len(&self) -> usize {
        self.genome_len
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn genome(&self, i: usize) -> &[u8] {
        &self.pop[i * self.genome_len..(i + 1) * self.genome_len]
    }

    pub fn genomes(&self) -> impl Iterator<Item = &[u8]> {
        self.pop.chunks_exact(self.genome_len)
    }

    /// Tracker id of genome `i`, when tracking.
    pub fn genome_id(&self, i: usize) -> Option<u64> {
        self.ids.get(i).copied()
    }

    /// Every tracked id still able to leave descendants.
    pub fn live_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.ids
            .iter()
            .copied()
            .chain(self.links.iter().flat_map(|l| {
                let out = if l.send_pending {
                    &l.outbox_ids[..]
                } else {
                    &[][..]
                };
                out.iter()
                    .chain(&l.inbox_ids[..l.inbox_len.min(l.inbox_ids.len())])
                    .copied()
            }))
    }

    fn fill_outbox(&mut self, k: usize) {
        let len = self.genome_len;
        let slots = self.links[k].outbox.len() / len;
        for j in 0..slots {
            let src = self.rng.random_range(0..self.population);
            let link = &mut self.links[k];
            link.outbox[j * len..(j + 1) * len]
                .copy_from_slice(&self.pop[src * len..(src + 1) * len]);
            if !self.ids.is_empty() {
                link.outbox_ids[j] = self.ids[src];
            }
        }
        let link = &mut self.links[k];
        link.send_pending = true;
        link.send_complete = false;
    }

    /// One generation: migration in, migration out, selection, mutation,
    /// deposit.
    pub fn step(&mut self, params: &StepParams<'_>, mut tracker: Option<&mut Tracker>) {
        let layout = params.layout;
        let len = self.genome_len;
        let tracking = tracker.is_some();
        let bits_mask = crate::surface::Differentia::mask(layout.differentia_bits());

        // Immigration.
        for k in 0..self.links.len() {
            if !self.links[k].recv_complete {
                continue;
            }
            let count = self.links[k].inbox_len;
            for j in 0..count {
                let dst = self.rng.random_range(0..self.population);
                let slot = &mut self.pop[dst * len..(dst + 1) * len];
                slot.copy_from_slice(&self.links[k].inbox[j * len..(j + 1) * len]);
                if tracking {
                    self.ids[dst] = self.links[k].inbox_ids[j];
                }
                if params.annotate && params.align {
                    // One deposit, and one tracked birth, per generation spent
                    // in transit.
                    while layout.counter(&self.pop[dst * len..(dst + 1) * len]) < self.generation {
                        let slot = &mut self.pop[dst * len..(dst + 1) * len];
                        let rank = layout.counter(slot);
                        let value = self.rng.random::<u64>() & bits_mask;
                        layout
                            .deposit(slot, value)
                            .expect("validated counter width");
                        if let Some(t) = tracker.as_deref_mut() {
                            self.ids[dst] = self.record_child(t, self.ids[dst], rank, Some(value));
                        }
                    }
                }
            }
            let link = &mut self.links[k];
            link.inbox_len = 0;
            link.recv_complete = false;
            self.stats.imported += count as u64;
            self.stats.recv_cycles += 1;
        }

        // Emigration.
        for k in 0..self.links.len() {
            if self.links[k].send_complete {
                self.fill_outbox(k);
                self.stats.send_cycles += 1;
            }
        }

        // Selection, mutation, deposit.
        let n = params.tournament_size;
        let treatment = params.treatment;
        for i in 0..self.population {
            let mut best = self.rng.random_range(0..self.population);
            let mut best_fit = layout.fitness(&self.pop[best * len..(best + 1) * len]);
            let mut ties = 1u32;
            for _ in 1..n {
                let c = self.rng.random_range(0..self.population);
                let f = layout.fitness(&self.pop[c * len..(c + 1) * len]);
                if f > best_fit {
                    best = c;
                    best_fit = f;
                    ties = 1;
                } else if f == best_fit {
                    ties += 1;
                    if self.rng.random_range(0..ties) == 0 {
                        best = c;
                    }
                }
            }
            let child = &mut self.next[i * len..(i + 1) * len];
            child.copy_from_slice(&self.pop[best * len..(best + 1) * len]);

            let delta = match treatment.mode {
                Mode::Neutral => 0.0,
                Mode::Purifying => {
                    if self.rng.random_bool(treatment.deleterious_prob) {
                        -params.deleterious.sample(&mut self.rng).abs()
                    } else {
                        0.0
                    }
                }
                Mode::Adaptive => {
                    if self.rng.random_bool(treatment.beneficial_prob) {
                        params.beneficial.sample(&mut self.rng).abs()
                    } else if self.rng.random_bool(treatment.deleterious_prob) {
                        -params.deleterious.sample(&mut self.rng).abs()
                    } else {
                        0.0
                    }
                }
            };
            if delta != 0.0 {
                let f = layout.fitness(child) as f64 + delta;
                layout.set_fitness(child, f as f32);
            }

            let deposit = if params.annotate {
                let value = self.rng.random::<u64>() & bits_mask;
                layout
                    .deposit(child, value)
                    .expect("validated counter width");
                Some(value)
            } else {
                None
            };

            if let Some(t) = tracker.as_deref_mut() {
                self.next_ids[i] = self.record_child(t, self.ids[best], self.generation, deposit);
            }
        }
        std::mem::swap(&mut self.pop, &mut self.next);
        std::mem::swap(&mut self.ids, &mut self.next_ids);
        self.generation += 1;
    }

    fn record_child(
        &mut self,
        tracker: &mut Tracker,
        parent: u64,
        generation: u64,
        deposit: Option<u64>,
    ) -> u64 {
        let id = make_id(self.index, self.next_seq);
        self.next_seq += 1;
        let founder_tag = tracker.get(parent).and_then(|r| r.founder_tag);
        tracker.record_birth(
            id,
            LineageRecord {
                parent: Some(parent),
                generation,
                pe: self.index as u32,
                founder_tag,
                deposits: Vec::new(),
            },
        );
        if let Some(value) = deposit {
            tracker.add_deposit(id, value);
        }
        id
    }

    /// Transport side: offers this PE's pending emigrants on link `k`.
    pub fn offer(&self, k: usize) -> Option<(&[u8], &[u64])> {
        let link = &self.links[k];
        link.send_pending
            .then(|| (&link.outbox[..], &link.outbox_ids[..]))
    }

    /// Transport side: the neighbor took the buffer on link `k`.
    pub fn acknowledge(&mut self, k: usize) {
        let link = &mut self.links[k];
        debug_assert!(link.send_pending);
        link.send_pending = false;
        link.send_complete = true;
        self.stats.exported += (link.outbox.len() / self.genome_len) as u64;
    }

    /// Transport side: genomes arriving on the link facing `from`. Returns
    /// whether they were accepted; a full or completed stage refuses.
    pub fn receive(
        &mut self,
        from: Direction,
        genomes: &[u8],
        ids: &[u64],
        recv_capacity: usize,
        loss_prob: f64,
    ) -> bool {
        let len = self.genome_len;
        let Some(k) = self.links.iter().position(|l| l.dir == from) else {
            return false;
        };
        let count = genomes.len() / len;
        let link = &self.links[k];
        if link.recv_complete || link.inbox_len + count > recv_capacity {
            return false;
        }
        if loss_prob > 0.0 && self.rng.random_bool(loss_prob) {
            self.stats.dropped += count as u64;
            return true;
        }
        let link = &mut self.links[k];
        let at = link.inbox_len;
        link.inbox[at * len..(at + count) * len].copy_from_slice(genomes);
        if !link.inbox_ids.is_empty() {
            link.inbox_ids[at..at + count].copy_from_slice(ids);
        }
        link.inbox_len += count;
        if link.inbox_len == recv_capacity {
            link.recv_complete = true;
        }
        true
    }
}

/// Globally unique tracker id: PE index in the high bits, per-PE sequence
/// in the low 40.
pub fn make_id(pe_index: usize, seq: u64) -> u64 {
    ((pe_index as u64 + 1) << 40) | seq
}
