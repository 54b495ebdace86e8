//! Asynchronous island-model genetic algorithm.
//!
//! Each processing element (PE) holds a fixed population of packed genomes
//! and exchanges migrants with its grid neighbors through small send and
//! receive buffers guarded by completion flags. A generation step drains
//! completed receives, refills completed sends, then replaces the population
//! by tournament selection, mutates fitness according to the treatment, and
//! deposits one differentia into every genome.
//!
//! The deterministic scheduler steps every PE once per round and then runs
//! the transport; given a config it always produces the same bytes. The
//! parallel scheduler splits the grid into row bands that trade migrants by
//! message passing.
//!
//! Per-PE random streams come from [`crate::rng::pe_stream`], so a PE's
//! draws do not depend on which scheduler or thread runs it.

mod config;
mod export;
mod grid;
mod pe;
mod tracker;

use thiserror::Error;

pub use config::{GridConfig, LayoutConfig, Mode, Scheduler, SimConfig, Topology, Treatment};
pub use export::{
    genomes_csv, perfect_tree, read_genomes_csv, sample_end_state, GenomeRow, SampledGenome,
};
pub use grid::{neighbors, Simulation};
pub use pe::{make_id, Direction, Link, Pe, PeStats};
pub use tracker::{LineageRecord, Tracker};

use crate::surface::SurfaceError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("genome csv row {row}: {message}")]
    Import { row: usize, message: String },
}

/// Builds a simulation, runs it to the generation limit, and returns it.
pub fn run(config: SimConfig) -> Result<Simulation, SimError> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end();
    Ok(sim)
}
