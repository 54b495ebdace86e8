use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::{has_extension, read_tree, usage, write_atomic, CliError, CliResult};
use crate::phylo::{
    build_forest, cliffs_delta, export_alife_csv, export_newick, median, EffectSize, Metric,
};
use crate::sim::read_genomes_csv;

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Genome CSV written by `simulate`.
    #[arg(long)]
    genomes: PathBuf,
    /// Join a forest under a single root at rank 0.
    #[arg(long)]
    stitch: bool,
    /// Output tree; `.csv` for ALife CSV, anything else for Newick.
    #[arg(long)]
    out: PathBuf,
}

pub fn reconstruct(args: ReconstructArgs) -> CliResult {
    let text = fs::read_to_string(&args.genomes)
        .with_context(|| format!("reading {}", args.genomes.display()))?;
    let (layout, leaves) =
        read_genomes_csv(&text).map_err(|e| anyhow!("{}: {e}", args.genomes.display()))?;
    let tree = build_forest(&leaves, args.stitch).map_err(|e| anyhow!(e))?;
    let body = if has_extension(&args.out, "csv") {
        export_alife_csv(&tree)
    } else {
        export_newick(&tree)
    };
    write_atomic(&args.out, body.as_bytes())?;
    println!(
        "layout {}: {} leaves, {} roots, max depth {}",
        layout.descriptor(),
        tree.leaves().len(),
        tree.roots().len(),
        tree.max_depth()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Trees to measure; `.csv` is read as ALife CSV, anything else as Newick.
    #[arg(long, num_args = 1.., required = true)]
    tree: Vec<PathBuf>,
    /// Comma-separated metric names.
    #[arg(long, default_value = "sbl,spd,mpd,med,colless")]
    metrics: String,
    /// Output CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One row of a metric table.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricRow {
    pub tree: String,
    pub metric: String,
    pub value: f64,
}

fn parse_metrics(list: &str) -> Result<Vec<Metric>, CliError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Metric>().map_err(|e| usage(e.to_string())))
        .collect()
}

pub fn metrics(args: MetricsArgs) -> CliResult {
    let metrics = parse_metrics(&args.metrics)?;
    if metrics.is_empty() {
        return Err(usage("no metrics requested"));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    for path in &args.tree {
        let tree = read_tree(path)?;
        for &m in &metrics {
            let value = m
                .evaluate(&tree)
                .map_err(|e| anyhow!("{}: {m}: {e}", path.display()))?;
            writer
                .serialize(MetricRow {
                    tree: path.display().to_string(),
                    metric: m.name().to_string(),
                    value,
                })
                .context("writing metric row")?;
        }
    }
    let body = writer.into_inner().map_err(|e| anyhow!("{e}"))?;
    match &args.out {
        Some(out) => write_atomic(out, &body)?,
        None => print!("{}", String::from_utf8_lossy(&body)),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Metric CSVs for the first group: a directory or a glob pattern.
    #[arg(long)]
    a: String,
    /// Metric CSVs for the second group.
    #[arg(long)]
    b: String,
    #[arg(long)]
    metric: String,
}

/// Expands a directory to its `*.csv` files, or a pattern to its matches.
fn expand(spec: &str) -> anyhow::Result<Vec<PathBuf>> {
    let pattern = if Path::new(spec).is_dir() {
        format!(
            "{}/*.csv",
            glob::Pattern::escape(spec.trim_end_matches('/'))
        )
    } else {
        spec.to_string()
    };
    let mut paths: Vec<PathBuf> = glob::glob(&pattern)
        .with_context(|| format!("bad pattern `{spec}`"))?
        .collect::<Result<_, _>>()?;
    paths.sort();
    if paths.is_empty() {
        anyhow::bail!("`{spec}` matched no files");
    }
    Ok(paths)
}

/// Every value of `metric` across the metric tables matched by `spec`.
pub fn collect_metric(spec: &str, metric: Metric) -> anyhow::Result<Vec<f64>> {
    let mut values = Vec::new();
    for path in expand(spec)? {
        let mut reader =
            csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
        for (k, row) in reader.deserialize::<MetricRow>().enumerate() {
            let row = row.with_context(|| format!("{} row {}", path.display(), k + 2))?;
            if row.metric == metric.name() {
                values.push(row.value);
            }
        }
    }
    Ok(values)
}

pub fn compare(args: CompareArgs) -> CliResult {
    let metric: Metric = args
        .metric
        .parse()
        .map_err(|e: crate::phylo::PhyloError| usage(e.to_string()))?;
    let a = collect_metric(&args.a, metric)?;
    let b = collect_metric(&args.b, metric)?;
    let d = cliffs_delta(&a, &b).map_err(|e| anyhow!("{metric}: {e}"))?;
    println!(
        "{metric}: d = {d:.4} ({}), n_a = {}, n_b = {}, median_a = {}, median_b = {}",
        EffectSize::classify(d),
        a.len(),
        b.len(),
        median(&a).unwrap_or(f64::NAN),
        median(&b).unwrap_or(f64::NAN),
    );
    Ok(())
}
