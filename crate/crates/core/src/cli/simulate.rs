use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use super::{usage, write_atomic, CliResult};
use crate::phylo::export_alife_csv;
use crate::sim::{
    genomes_csv, perfect_tree, sample_end_state, Mode, Scheduler, SimConfig, SimError, Simulation,
    Topology,
};
use crate::surface::{HeaderKind, Policy};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TreatmentArg {
    Neutral,
    Purifying,
    Adaptive,
}

impl From<TreatmentArg> for Mode {
    fn from(t: TreatmentArg) -> Self {
        match t {
            TreatmentArg::Neutral => Mode::Neutral,
            TreatmentArg::Purifying => Mode::Purifying,
            TreatmentArg::Adaptive => Mode::Adaptive,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TopologyArg {
    Bounded,
    Torus,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchedulerArg {
    Deterministic,
    Parallel,
}

/// Flags override values read from `--config`.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation config, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid size as WxH.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Genomes per PE.
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    generations: Option<u64>,
    #[arg(long, value_enum)]
    treatment: Option<TreatmentArg>,
    /// Genome header: tagged or fitness.
    #[arg(long)]
    layout: Option<HeaderKind>,
    /// Surface policy: steady, tilted or hybrid.
    #[arg(long)]
    policy: Option<Policy>,
    #[arg(long)]
    surface_slots: Option<usize>,
    #[arg(long)]
    differentia_bits: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    topology: Option<TopologyArg>,
    #[arg(long)]
    tournament_size: Option<usize>,
    #[arg(long, value_enum)]
    scheduler: Option<SchedulerArg>,
    /// Worker threads for the parallel scheduler; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Probability that a migrant is lost in transit.
    #[arg(long)]
    loss_prob: Option<f64>,
    /// Record exact ancestry and export it as perfect_tree.csv.
    #[arg(long)]
    track_perfect: bool,
    /// Genomes sampled from each PE for export.
    /// Defaults to 1, or to the manifest's value.
    #[arg(long)]
    samples_per_pe: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(w)?, parse(h)?))
}

/// Everything needed to rerun a simulation in deterministic mode.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub config: SimConfig,
    pub samples_per_pe: usize,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

fn load_config(path: &PathBuf) -> anyhow::Result<(SimConfig, Option<usize>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(m) = serde_json::from_str::<RunManifest>(&text) {
        return Ok((m.config, Some(m.samples_per_pe)));
    }
    let config =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((config, None))
}

impl SimulateArgs {
    fn build(&self) -> anyhow::Result<(SimConfig, usize)> {
        let (mut c, samples) = match &self.config {
            Some(path) => load_config(path)?,
            None => (SimConfig::default(), None),
        };
        let samples = self.samples_per_pe.or(samples).unwrap_or(1);
        if let Some((w, h)) = self.grid {
            c.grid.width = w;
            c.grid.height = h;
        }
        macro_rules! set {
            ($field:ident => $($target:tt)+) => {
                if let Some(v) = self.$field {
                    $($target)+ = v.into();
                }
            };
        }
        set!(pop => c.grid.population);
        set!(generations => c.grid.generations);
        set!(seed => c.grid.seed);
        set!(tournament_size => c.grid.tournament_size);
        set!(treatment => c.treatment.mode);
        set!(layout => c.layout.header);
        set!(policy => c.layout.policy);
        set!(surface_slots => c.layout.surface_slots);
        set!(differentia_bits => c.layout.differentia_bits);
        set!(threads => c.threads);
        set!(loss_prob => c.loss_prob);
        if let Some(t) = self.topology {
            c.grid.topology = match t {
                TopologyArg::Bounded => Topology::Bounded,
                TopologyArg::Torus => Topology::Torus,
            };
        }
        if let Some(s) = self.scheduler {
            c.scheduler = match s {
                SchedulerArg::Deterministic => Scheduler::Deterministic,
                SchedulerArg::Parallel => Scheduler::Parallel,
            };
        }
        c.track_perfect |= self.track_perfect;
        Ok((c, samples))
    }
}

pub fn run(args: SimulateArgs) -> CliResult {
    let (config, samples_per_pe) = args.build()?;
    if samples_per_pe == 0 {
        return Err(usage("--samples-per-pe must be at least 1"));
    }
    let started = Instant::now();
    let mut sim = match Simulation::new(config.clone()) {
        Ok(sim) => sim,
        Err(e @ SimError::Config(_)) | Err(e @ SimError::Surface(_)) => {
            return Err(usage(e.to_string()))
        }
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    info!(
        "running {}x{} grid for {} generations",
        config.grid.width, config.grid.height, config.grid.generations
    );
    sim.run_to_end();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let samples = sample_end_state(&sim, samples_per_pe);
    let mut outputs = Vec::new();
    let genomes_path = args.out.join("genomes.csv");
    write_atomic(
        &genomes_path,
        genomes_csv(&sim.layout(), &samples).as_bytes(),
    )?;
    outputs.push(genomes_path.display().to_string());
    if let Some(tree) = perfect_tree(&sim, &samples) {
        let path = args.out.join("perfect_tree.csv");
        write_atomic(&path, export_alife_csv(&tree).as_bytes())?;
        outputs.push(path.display().to_string());
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.grid.seed,
        config,
        samples_per_pe,
        outputs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    write_atomic(&args.out.join("manifest.json"), json.as_bytes())?;
    println!(
        "wrote {} genomes to {} in {:.2}s",
        samples.len(),
        args.out.display(),
        manifest.wall_clock_seconds
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes_parse() {
        assert_eq!(parse_grid("3x4"), Ok((3, 4)));
        assert_eq!(parse_grid("16X16"), Ok((16, 16)));
        assert!(parse_grid("3").is_err());
        assert!(parse_grid("ax3").is_err());
    }
}
