use std::collections::{BTreeSet, HashMap};

use log::warn;

use super::{PhyloError, PhyloTree};
use crate::surface::RecordSet;

/// One end-state annotation to place in the reconstruction.
#[derive(Clone, Debug)]
pub struct LeafAnnotation {
    pub records: RecordSet,
    pub label: String,
    pub founder_tag: Option<u16>,
}

impl LeafAnnotation {
    pub fn new(records: RecordSet, label: impl Into<String>, founder_tag: Option<u16>) -> Self {
        Self {
            records,
            label: label.into(),
            founder_tag,
        }
    }
}

struct TrieNode {
    rank: u64,
    children: Vec<usize>,
    index: HashMap<(u64, u64), usize>,
    leaves: Vec<usize>,
}

impl TrieNode {
    fn new(rank: u64) -> Self {
        Self {
            rank,
            children: Vec::new(),
            index: HashMap::new(),
            leaves: Vec::new(),
        }
    }
}

/// Builds a phylogeny by inserting every annotation's record sequence into
/// a trie keyed on `(rank, differentia)`.
///
/// Only ranks retained by all annotations are used. Branching trie nodes
/// become inner nodes at their rank, leaves sit at their annotation's
/// counter, and lineages that disagree at the first common rank end up under
/// different roots. With `stitch`, multiple roots are joined under a
/// synthetic ancestor at time 0.
pub fn build_forest(leaves: &[LeafAnnotation], stitch: bool) -> Result<PhyloTree, PhyloError> {
    if leaves.is_empty() {
        return Err(PhyloError::EmptyInput);
    }
    let mut common: BTreeSet<u64> = leaves[0].records.ranks().collect();
    for leaf in &leaves[1..] {
        let ranks: BTreeSet<u64> = leaf.records.ranks().collect();
        common.retain(|r| ranks.contains(r));
    }
    if common.is_empty() && leaves.len() > 1 {
        warn!("annotations share no retained rank; reconstruction is a star forest");
    }

    // Node 0 is a virtual root above all rank-0 records.
    let mut trie = vec![TrieNode::new(0)];
    for (leaf_index, leaf) in leaves.iter().enumerate() {
        let mut at = 0;
        for &(rank, value) in leaf.records.entries() {
            if !common.contains(&rank) {
                continue;
            }
            at = match trie[at].index.get(&(rank, value)) {
                Some(&child) => child,
                None => {
                    let child = trie.len();
                    trie.push(TrieNode::new(rank));
                    trie[at].index.insert((rank, value), child);
                    trie[at].children.push(child);
                    child
                }
            };
        }
        trie[at].leaves.push(leaf_index);
    }

    let mut tree = PhyloTree::new();
    // Depth-first, carrying the nearest emitted ancestor.
    let mut stack: Vec<(usize, Option<usize>)> = vec![(0, None)];
    while let Some((at, parent)) = stack.pop() {
        let node = &trie[at];
        let branches = node.children.len() + node.leaves.len();
        let here = if at != 0 && branches >= 2 {
            Some(tree.add_node(parent, node.rank, None, None)?)
        } else {
            parent
        };
        for &leaf_index in &node.leaves {
            let leaf = &leaves[leaf_index];
            tree.add_node(
                here,
                leaf.records.counter(),
                Some(leaf.label.clone()),
                leaf.founder_tag,
            )?;
        }
        for &child in node.children.iter().rev() {
            stack.push((child, here));
        }
    }
    let tree = tree.normalized();
    Ok(if stitch { tree.stitched() } else { tree })
}

/// Bracket on the generation of the most recent common ancestor of two
/// annotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MrcaEstimate {
    /// The MRCA lies in `[last_match, first_mismatch)`.
    Bounded {
        last_match: u64,
        first_mismatch: u64,
    },
    /// No shared ancestry is detectable.
    Disjoint,
}

pub fn estimate_mrca_range(a: &RecordSet, b: &RecordSet) -> MrcaEstimate {
    let (ea, eb) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    let mut last_match = None;
    while i < ea.len() && j < eb.len() {
        let (ra, va) = ea[i];
        let (rb, vb) = eb[j];
        if ra < rb {
            i += 1;
        } else if rb < ra {
            j += 1;
        } else {
            if va != vb {
                return match last_match {
                    Some(last_match) => MrcaEstimate::Bounded {
                        last_match,
                        first_mismatch: ra,
                    },
                    None => MrcaEstimate::Disjoint,
                };
            }
            last_match = Some(ra);
            i += 1;
            j += 1;
        }
    }
    match last_match {
        Some(last_match) => MrcaEstimate::Bounded {
            last_match,
            first_mismatch: a.counter().min(b.counter()),
        },
        None => MrcaEstimate::Disjoint,
    }
}
