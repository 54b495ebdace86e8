//! The `hsurf` command line.
//!
//! Exit codes: 0 on success, 1 when a check fails or input data is invalid,
//! 2 for usage errors, including flag combinations the simulator rejects.

mod analysis;
mod simulate;
mod tools;

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};

use crate::phylo::{import_alife_csv, import_newick, PhyloTree};

#[derive(Debug, Parser)]
#[command(
    name = "hsurf",
    version,
    about = "Hereditary stratigraphy surfaces, simulation, and reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the island-model GA and export end-state genomes.
    Simulate(simulate::SimulateArgs),
    /// Build a tree from exported genomes.
    Reconstruct(analysis::ReconstructArgs),
    /// Compute phylometrics for one or more trees.
    Metrics(analysis::MetricsArgs),
    /// Cliff's delta between two sets of metric tables.
    Compare(analysis::CompareArgs),
    /// Check closed-form placement against replay and gap bounds.
    Oracle(tools::OracleArgs),
    /// Report deposit and generation throughput.
    Bench(tools::BenchArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e)
    }
}

pub type CliResult = Result<(), CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Entry point for the binary. Returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(std::env::args_os())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Reconstruct(a) => analysis::reconstruct(a),
        Command::Metrics(a) => analysis::metrics(a),
        Command::Compare(a) => analysis::compare(a),
        Command::Oracle(a) => tools::oracle(a),
        Command::Bench(a) => tools::bench(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Failed(err) => eprintln!("error: {err:#}"),
            }
            e.exit_code()
        }
    }
}

/// Reads a tree, as ALife CSV when the extension is `.csv` and as Newick
/// otherwise.
pub(crate) fn read_tree(path: &Path) -> anyhow::Result<PhyloTree> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    let tree = if has_extension(path, "csv") {
        import_alife_csv(&text)
    } else {
        import_newick(&text)
    };
    tree.map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub(crate) fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Writes `contents` next to `path` and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path)
        .map_err(|e| anyhow::anyhow!("{}: {}", path.display(), e.error))?;
    Ok(())
}
