use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use super::{PhyloError, PhyloTree};

// Forests are scored as if every root hung from one extra virtual root by a
// zero-length edge: it adds an edge to paths between trees but no length.

/// Sum of `origin_time(child) - origin_time(parent)` over all edges.
pub fn sum_branch_length(t: &PhyloTree) -> u64 {
    (0..t.len()).map(|i| t.branch_length(i)).sum()
}

/// Sum over unordered leaf pairs of the number of edges between them.
pub fn sum_pairwise_distance(t: &PhyloTree) -> u64 {
    let counts = t.leaf_counts();
    let roots = t.roots();
    let n = roots.iter().map(|&r| counts[r]).sum::<usize>() as u64;
    // Each edge is crossed by every pair it separates.
    let mut total = 0u64;
    for (i, &below) in counts.iter().enumerate() {
        let below = below as u64;
        if t.parent(i).is_some() || roots.len() > 1 {
            total += below * (n - below);
        }
    }
    total
}

pub fn mean_pairwise_distance(t: &PhyloTree) -> Result<f64, PhyloError> {
    let n = t.leaves().len();
    if n < 2 {
        return Err(PhyloError::TooFewLeaves { needed: 2, got: n });
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(sum_pairwise_distance(t) as f64 / pairs)
}

/// Colless-like balance index for multifurcating trees, with node weight
/// `ln(out_degree + e)` and mean deviation from the median as dispersion.
pub fn colless_like(t: &PhyloTree) -> f64 {
    let mut size = vec![0.0f64; t.len()];
    for i in (0..t.len()).rev() {
        size[i] += (t.children(i).len() as f64 + E).ln();
        if let Some(p) = t.parent(i) {
            size[p] += size[i];
        }
    }
    let mut total = 0.0;
    let mut buf = Vec::new();
    for i in 0..t.len() {
        let kids = t.children(i);
        if kids.is_empty() {
            continue;
        }
        buf.clear();
        buf.extend(kids.iter().map(|&c| size[c]));
        buf.sort_by(f64::total_cmp);
        let k = buf.len();
        let med = if k % 2 == 0 {
            (buf[k / 2 - 1] + buf[k / 2]) / 2.0
        } else {
            buf[k / 2]
        };
        total += buf.iter().map(|s| (s - med).abs()).sum::<f64>() / k as f64;
    }
    total
}

/// Mean fair-proportion evolutionary distinctiveness over leaves.
pub fn mean_evolutionary_distinctiveness(t: &PhyloTree) -> Result<f64, PhyloError> {
    let counts = t.leaf_counts();
    let mut ed = vec![0.0f64; t.len()];
    for i in 0..t.len() {
        if let Some(p) = t.parent(i) {
            ed[i] = ed[p] + t.branch_length(i) as f64 / counts[i] as f64;
        }
    }
    let leaves = t.leaves();
    if leaves.is_empty() {
        return Err(PhyloError::TooFewLeaves { needed: 1, got: 0 });
    }
    Ok(leaves.iter().map(|&l| ed[l]).sum::<f64>() / leaves.len() as f64)
}

/// Named metrics selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    SumBranchLength,
    SumPairwiseDistance,
    MeanPairwiseDistance,
    MeanEvolutionaryDistinctiveness,
    CollessLike,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::SumBranchLength,
        Metric::SumPairwiseDistance,
        Metric::MeanPairwiseDistance,
        Metric::MeanEvolutionaryDistinctiveness,
        Metric::CollessLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::SumBranchLength => "sbl",
            Metric::SumPairwiseDistance => "spd",
            Metric::MeanPairwiseDistance => "mpd",
            Metric::MeanEvolutionaryDistinctiveness => "med",
            Metric::CollessLike => "colless",
        }
    }

    pub fn evaluate(self, t: &PhyloTree) -> Result<f64, PhyloError> {
        Ok(match self {
            Metric::SumBranchLength => sum_branch_length(t) as f64,
            Metric::SumPairwiseDistance => sum_pairwise_distance(t) as f64,
            Metric::MeanPairwiseDistance => mean_pairwise_distance(t)?,
            Metric::MeanEvolutionaryDistinctiveness => mean_evolutionary_distinctiveness(t)?,
            Metric::CollessLike => colless_like(t),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = PhyloError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| PhyloError::UnknownMetric(s.to_string()))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn branch_length_example() {
        let mut t = PhyloTree::new();
        let r = t.add_node(None, 0, None, None).unwrap();
        let a = t.add_node(Some(r), 4, None, None).unwrap();
        t.add_node(Some(a), 10, None, None).unwrap();
        t.add_node(Some(a), 10, None, None).unwrap();
        assert_eq!(sum_branch_length(&t), 16);
    }

    #[test]
    fn single_leaf() {
        let mut t = PhyloTree::new();
        t.add_node(None, 7, Some("x".into()), None).unwrap();
        assert_eq!(sum_branch_length(&t), 0);
        assert_eq!(sum_pairwise_distance(&t), 0);
        assert!(mean_pairwise_distance(&t).is_err());
        assert_eq!(mean_evolutionary_distinctiveness(&t).unwrap(), 0.0);
    }

    #[test]
    fn cherry_and_star_distances() {
        assert_eq!(sum_pairwise_distance(&star(2)), 2);
        assert_eq!(mean_pairwise_distance(&star(2)).unwrap(), 2.0);
        assert_eq!(sum_pairwise_distance(&star(4)), 12);
        assert_eq!(mean_pairwise_distance(&star(4)).unwrap(), 2.0);
    }

    #[test]
    fn caterpillar_four_distances() {
        // Leaves at depths 1, 2, 3, 3; paths 3+4+4+3+3+2.
        let t = caterpillar(4);
        assert_eq!(sum_pairwise_distance(&t), 19);
    }

    #[test]
    fn star_ed() {
        assert_eq!(mean_evolutionary_distinctiveness(&star(5)).unwrap(), 1.0);
        let mut t = PhyloTree::new();
        let r = t.add_node(None, 0, None, None).unwrap();
        t.add_node(Some(r), 10, None, None).unwrap();
        t.add_node(Some(r), 10, None, None).unwrap();
        assert_eq!(mean_evolutionary_distinctiveness(&t).unwrap(), 10.0);
    }

    #[test]
    fn colless_symmetric_is_zero() {
        assert_eq!(colless_like(&star(6)), 0.0);
        assert_eq!(colless_like(&star(2)), 0.0);
        assert!(colless_like(&balanced(3)).abs() < 1e-12);
        assert!(colless_like(&caterpillar(8)) > colless_like(&balanced(3)));
    }

    #[test]
    fn metric_names() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert_eq!(
            "bogus".parse::<Metric>(),
            Err(PhyloError::UnknownMetric("bogus".into()))
        );
    }

    #[test]
    fn forest_joins_through_virtual_root() {
        let mut t = PhyloTree::new();
        t.add_node(None, 3, Some("a".into()), None).unwrap();
        t.add_node(None, 3, Some("b".into()), None).unwrap();
        assert_eq!(sum_pairwise_distance(&t), 2);
    }
}
