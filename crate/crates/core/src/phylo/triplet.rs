use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PhyloError, PhyloTree};

/// Outcome fractions of a sampled triplet comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripletReport {
    pub samples: usize,
    pub correct: f64,
    pub wrong: f64,
    pub unsure: f64,
}

/// Compares `reconstruction` against `reference` on `n_samples` leaf
/// triples drawn uniformly without replacement within each triple.
///
/// Each triple is scored by which leaf is the outgroup in each tree. The
/// comparison is lenient: a reconstruction that resolves a reference
/// polytomy is counted correct, and a triple the reconstruction leaves
/// unresolved is counted unsure.
pub fn sampled_triplet_error(
    reference: &PhyloTree,
    reconstruction: &PhyloTree,
    n_samples: usize,
    seed: u64,
) -> Result<TripletReport, PhyloError> {
    let ref_labels = reference.leaf_labels()?;
    let rec_labels = reconstruction.leaf_labels()?;
    let a: BTreeSet<&String> = ref_labels.keys().collect();
    let b: BTreeSet<&String> = rec_labels.keys().collect();
    if a != b {
        let only: Vec<&String> = a.symmetric_difference(&b).take(5).copied().collect();
        return Err(PhyloError::LabelMismatch(format!("{only:?}")));
    }
    if a.len() < 3 {
        return Err(PhyloError::TooFewLeaves {
            needed: 3,
            got: a.len(),
        });
    }
    let labels: Vec<&String> = a.into_iter().collect();
    let ref_anc = Ancestry::new(reference);
    let rec_anc = Ancestry::new(reconstruction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut correct, mut wrong, mut unsure) = (0usize, 0usize, 0usize);
    for _ in 0..n_samples {
        let pick = sample(&mut rng, labels.len(), 3);
        let trio: Vec<&String> = pick.iter().map(|i| labels[i]).collect();
        let r = ref_anc.outgroup([
            ref_labels[trio[0]],
            ref_labels[trio[1]],
            ref_labels[trio[2]],
        ]);
        let c = rec_anc.outgroup([
            rec_labels[trio[0]],
            rec_labels[trio[1]],
            rec_labels[trio[2]],
        ]);
        match (r, c) {
            (_, None) => unsure += 1,
            (Some(x), Some(y)) if x != y => wrong += 1,
            _ => correct += 1,
        }
    }
    let total = n_samples.max(1) as f64;
    Ok(TripletReport {
        samples: n_samples,
        correct: correct as f64 / total,
        wrong: wrong as f64 / total,
        unsure: unsure as f64 / total,
    })
}

struct Ancestry<'a> {
    tree: &'a PhyloTree,
    depth: Vec<usize>,
}

impl<'a> Ancestry<'a> {
    fn new(tree: &'a PhyloTree) -> Self {
        Self {
            tree,
            depth: tree.depths(),
        }
    }

    /// `None` when the nodes sit in different trees of a forest.
    fn lca(&self, mut a: usize, mut b: usize) -> Option<usize> {
        while self.depth[a] > self.depth[b] {
            a = self.tree.parent(a)?;
        }
        while self.depth[b] > self.depth[a] {
            b = self.tree.parent(b)?;
        }
        while a != b {
            a = self.tree.parent(a)?;
            b = self.tree.parent(b)?;
        }
        Some(a)
    }

    /// Position (0..3) of the outgroup, or `None` for an unresolved triple.
    fn outgroup(&self, trio: [usize; 3]) -> Option<usize> {
        let l01 = self.lca(trio[0], trio[1]);
        let l02 = self.lca(trio[0], trio[2]);
        let l12 = self.lca(trio[1], trio[2]);
        // Two of the three pairwise ancestors always coincide; the odd pair
        // out, if any, is the closer one.
        if l01 == l02 && l02 == l12 {
            None
        } else if l02 == l12 {
            Some(2)
        } else if l01 == l12 {
            Some(1)
        } else {
            Some(0)
        }
    }
}
