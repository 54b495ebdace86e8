use std::collections::BTreeSet;
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::thread;

use log::debug;

use super::config::{Scheduler, SimConfig, Topology};
use super::pe::{Direction, Pe, StepParams};
use super::tracker::Tracker;
use super::SimError;
use crate::surface::GenomeLayout;

const PRUNE_EVERY: u64 = 16;

/// Neighbors of `(x, y)` in fixed N, S, E, W order. North is `y - 1`. A
/// direction that would lead off the grid, or back to the PE itself on a
/// torus, is omitted.
pub fn neighbors(
    width: usize,
    height: usize,
    topology: Topology,
    x: usize,
    y: usize,
) -> Vec<(Direction, usize)> {
    let mut out = Vec::with_capacity(4);
    for dir in Direction::ALL {
        let (dx, dy): (isize, isize) = match dir {
            Direction::North => (0, -1),
            Direction::South => (0, 1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
        };
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        let (nx, ny) = match topology {
            Topology::Bounded => {
                if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                    continue;
                }
                (nx as usize, ny as usize)
            }
            Topology::Torus => (
                nx.rem_euclid(width as isize) as usize,
                ny.rem_euclid(height as isize) as usize,
            ),
        };
        if (nx, ny) == (x, y) {
            continue;
        }
        out.push((dir, ny * width + nx));
    }
    out
}

/// A grid of PEs and, optionally, the perfect tracker.
pub struct Simulation {
    config: SimConfig,
    layout: GenomeLayout,
    pes: Vec<Pe>,
    tracker: Option<Tracker>,
    round: u64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        let layout = config.validate()?;
        let g = &config.grid;
        let mut tracker = config
            .track_perfect
            .then(|| Tracker::new(config.track_deposits));
        let mut pes = Vec::with_capacity(g.width * g.height);
        for y in 0..g.height {
            for x in 0..g.width {
                let index = y * g.width + x;
                let nbrs = neighbors(g.width, g.height, g.topology, x, y);
                pes.push(Pe::new(
                    index,
                    x,
                    y,
                    &nbrs,
                    &config,
                    layout,
                    tracker.as_mut(),
                ));
            }
        }
        Ok(Self {
            config,
            layout,
            pes,
            tracker,
            round: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn layout(&self) -> GenomeLayout {
        self.layout
    }

    pub fn pes(&self) -> &[Pe] {
        &self.pes
    }

    pub fn tracker(&self) -> Option<&Tracker> {
        self.tracker.as_ref()
    }

    /// Generations completed by every PE.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn finished(&self) -> bool {
        self.round >= self.config.grid.generations
    }

    /// One deterministic round: every PE steps in index order, then every
    /// link is serviced in (PE, direction) order.
    pub fn step_round(&mut self) {
        let params = StepParams::new(&self.config, self.layout);
        for pe in &mut self.pes {
            pe.step(&params, self.tracker.as_mut());
        }
        transport(&mut self.pes, &self.config);
        self.round += 1;
        if self.round.is_multiple_of(PRUNE_EVERY) {
            self.prune();
        }
    }

    fn prune(&mut self) {
        if let Some(tracker) = self.tracker.as_mut() {
            let live: Vec<u64> = self.pes.iter().flat_map(|pe| pe.live_ids()).collect();
            let removed = tracker.prune_extinct(live);
            debug!("round {}: pruned {removed} extinct records", self.round);
        }
    }

    /// Runs until every PE has executed the configured number of steps.
    /// Migration still in flight at that point is discarded.
    pub fn run_to_end(&mut self) {
        match self.config.scheduler {
            Scheduler::Deterministic => {
                while !self.finished() {
                    self.step_round();
                }
                self.prune();
            }
            Scheduler::Parallel => {
                let remaining = self.config.grid.generations - self.round;
                let threads = match self.config.threads {
                    0 => thread::available_parallelism().map_or(1, |n| n.get()),
                    n => n,
                };
                run_parallel(&mut self.pes, &self.config, self.layout, remaining, threads);
                self.round += remaining;
            }
        }
    }
}

/// Deterministic transport over all links. Receivers see offers in
/// (sender index, direction) order.
fn transport(pes: &mut [Pe], config: &SimConfig) {
    let recv_cap = config.grid.recv_capacity;
    for from in 0..pes.len() {
        for k in 0..pes[from].links.len() {
            let (dir, to) = (pes[from].links[k].dir, pes[from].links[k].neighbor);
            let accepted = {
                let (sender, receiver) = pair_mut(pes, from, to);
                match sender.offer(k) {
                    Some((genomes, ids)) => {
                        receiver.receive(dir.opposite(), genomes, ids, recv_cap, config.loss_prob)
                    }
                    None => false,
                }
            };
            if accepted {
                pes[from].acknowledge(k);
            }
        }
    }
}

fn pair_mut(pes: &mut [Pe], a: usize, b: usize) -> (&Pe, &mut Pe) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = pes.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = pes.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

struct Offer {
    from: usize,
    link: usize,
    dir: Direction,
    to: usize,
    genomes: Vec<u8>,
    ids: Vec<u64>,
}

struct Ack {
    from: usize,
    link: usize,
}

enum Message {
    Offers(Vec<Offer>),
    Acks(Vec<Ack>),
}

struct Shard {
    id: usize,
    first: usize,
    pes: Vec<Pe>,
    peers: Vec<usize>,
}

/// Row bands on worker threads. Shards exchange offers and acks with their
/// neighbor bands over bounded channels once per round. Every receiver
/// handles its offers in the same order as the deterministic transport, so
/// results match that scheduler.
fn run_parallel(
    pes: &mut Vec<Pe>,
    config: &SimConfig,
    layout: GenomeLayout,
    rounds: u64,
    threads: usize,
) {
    let width = config.grid.width;
    let height = config.grid.height;
    let shards = threads.clamp(1, height);
    let rows_per = height.div_ceil(shards);
    let owner = |pe: usize| (pe / width) / rows_per;
    let shard_count = owner(pes.len() - 1) + 1;

    let mut shards: Vec<Shard> = Vec::with_capacity(shard_count);
    let mut all = std::mem::take(pes).into_iter();
    for id in 0..shard_count {
        let first = id * rows_per * width;
        let end = ((id + 1) * rows_per * width).min(width * height);
        let band: Vec<Pe> = all.by_ref().take(end - first).collect();
        let peers: BTreeSet<usize> = band
            .iter()
            .flat_map(|pe| pe.links.iter().map(|l| owner(l.neighbor)))
            .filter(|&s| s != id)
            .collect();
        shards.push(Shard {
            id,
            first,
            pes: band,
            peers: peers.into_iter().collect(),
        });
    }

    let mut senders: Vec<Vec<(usize, SyncSender<Message>)>> =
        (0..shard_count).map(|_| Vec::new()).collect();
    let mut receivers: Vec<Vec<(usize, Receiver<Message>)>> =
        (0..shard_count).map(|_| Vec::new()).collect();
    for shard in &shards {
        for &peer in &shard.peers {
            let (tx, rx) = sync_channel(1);
            senders[shard.id].push((peer, tx));
            receivers[peer].push((shard.id, rx));
        }
    }

    let done: Vec<Shard> = thread::scope(|scope| {
        let handles: Vec<_> = shards
            .into_iter()
            .zip(senders.into_iter().zip(receivers))
            .map(|(shard, (tx, rx))| {
                scope.spawn(move || run_shard(shard, tx, rx, config, layout, rounds, &owner))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard panicked"))
            .collect()
    });
    for shard in done {
        pes.extend(shard.pes);
    }
}

fn run_shard(
    mut shard: Shard,
    tx: Vec<(usize, SyncSender<Message>)>,
    rx: Vec<(usize, Receiver<Message>)>,
    config: &SimConfig,
    layout: GenomeLayout,
    rounds: u64,
    owner: &(dyn Fn(usize) -> usize + Sync),
) -> Shard {
    let params = StepParams::new(config, layout);
    let recv_cap = config.grid.recv_capacity;
    let local = |shard: &Shard, pe: usize| pe - shard.first;
    for _ in 0..rounds {
        for pe in &mut shard.pes {
            pe.step(&params, None);
        }

        let mut inbound: Vec<Offer> = Vec::new();
        let mut outbound: Vec<Vec<Offer>> = tx.iter().map(|_| Vec::new()).collect();
        for pe in &shard.pes {
            for (k, link) in pe.links.iter().enumerate() {
                if let Some((genomes, ids)) = pe.offer(k) {
                    let offer = Offer {
                        from: pe.index,
                        link: k,
                        dir: link.dir,
                        to: link.neighbor,
                        genomes: genomes.to_vec(),
                        ids: ids.to_vec(),
                    };
                    let dest = owner(link.neighbor);
                    if dest == shard.id {
                        inbound.push(offer);
                    } else {
                        let slot = tx.iter().position(|(p, _)| *p == dest).expect("peer shard");
                        outbound[slot].push(offer);
                    }
                }
            }
        }
        for ((_, sender), batch) in tx.iter().zip(outbound) {
            sender
                .send(Message::Offers(batch))
                .expect("peer shard alive");
        }
        for (_, receiver) in &rx {
            match receiver.recv().expect("peer shard alive") {
                Message::Offers(batch) => inbound.extend(batch),
                Message::Acks(_) => unreachable!("acks arrive after offers"),
            }
        }

        inbound.sort_by_key(|o| (o.from, o.dir));
        let mut local_acks = Vec::new();
        let mut remote_acks: Vec<Vec<Ack>> = tx.iter().map(|_| Vec::new()).collect();
        for offer in inbound {
            let i = local(&shard, offer.to);
            let accepted = shard.pes[i].receive(
                offer.dir.opposite(),
                &offer.genomes,
                &offer.ids,
                recv_cap,
                config.loss_prob,
            );
            if accepted {
                let ack = Ack {
                    from: offer.from,
                    link: offer.link,
                };
                let dest = owner(offer.from);
                if dest == shard.id {
                    local_acks.push(ack);
                } else {
                    let slot = tx.iter().position(|(p, _)| *p == dest).expect("peer shard");
                    remote_acks[slot].push(ack);
                }
            }
        }
        for ((_, sender), batch) in tx.iter().zip(remote_acks) {
            sender.send(Message::Acks(batch)).expect("peer shard alive");
        }
        for (_, receiver) in &rx {
            match receiver.recv().expect("peer shard alive") {
                Message::Acks(batch) => local_acks.extend(batch),
                Message::Offers(_) => unreachable!("offers arrive before acks"),
            }
        }
        for ack in local_acks {
            let i = local(&shard, ack.from);
            shard.pes[i].acknowledge(ack.link);
        }
    }
    shard
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_corner_and_center() {
        assert_eq!(
            neighbors(3, 3, Topology::Bounded, 0, 0),
            vec![(Direction::South, 3), (Direction::East, 1)]
        );
        assert_eq!(neighbors(3, 3, Topology::Bounded, 1, 1).len(), 4);
        assert!(neighbors(1, 1, Topology::Bounded, 0, 0).is_empty());
        assert!(neighbors(1, 1, Topology::Torus, 0, 0).is_empty());
    }

    #[test]
    fn torus_two_by_two_wraps() {
        for y in 0..2 {
            for x in 0..2 {
                let n = neighbors(2, 2, Topology::Torus, x, y);
                assert_eq!(n.len(), 4);
                for (dir, other) in n {
                    let (ox, oy) = (other % 2, other / 2);
                    let back = neighbors(2, 2, Topology::Torus, ox, oy);
                    assert!(back.contains(&(dir.opposite(), y * 2 + x)));
                }
            }
        }
    }

    #[test]
    fn torus_wraps_north_of_top_row() {
        let n = neighbors(4, 3, Topology::Torus, 1, 0);
        assert_eq!(n[0], (Direction::North, 2 * 4 + 1));
        assert_eq!(n[3], (Direction::West, 0));
    }
}
