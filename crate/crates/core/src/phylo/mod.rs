//! Phylogeny reconstruction from surface annotations, and the tree
//! statistics used to compare treatments.
//!
//! Trees are built by percolating each annotation's retained
//! `(rank, differentia)` sequence down a trie; the branching points become
//! inner nodes whose origin time is the rank at which the lineages were last
//! known to agree.

mod io;
mod metrics;
mod stats;
mod tree;
mod trie;
mod triplet;

use thiserror::Error;

pub use io::{export_alife_csv, export_newick, import_alife_csv, import_newick};
pub use metrics::{
    colless_like, mean_evolutionary_distinctiveness, mean_pairwise_distance, sum_branch_length,
    sum_pairwise_distance, Metric,
};
pub use stats::{cliffs_delta, median, EffectSize};
pub use tree::{Node, PhyloTree};
pub use trie::{build_forest, estimate_mrca_range, LeafAnnotation, MrcaEstimate};
pub use triplet::{sampled_triplet_error, TripletReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyloError {
    #[error("no annotations to reconstruct from")]
    EmptyInput,
    #[error("parent {0} does not exist")]
    UnknownParent(u64),
    #[error("node {child} originates before its parent {parent}")]
    TimeReversal { child: u64, parent: u64 },
    #[error("duplicate leaf label `{0}`")]
    DuplicateLabel(String),
    #[error("need at least {needed} leaves, tree has {got}")]
    TooFewLeaves { needed: usize, got: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("leaf label sets differ: {0}")]
    LabelMismatch(String),
    #[error("unknown metric `{0}` (valid: sbl, spd, mpd, med, colless)")]
    UnknownMetric(String),
    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("newick offset {offset}: {message}")]
    Newick { offset: usize, message: String },
}
