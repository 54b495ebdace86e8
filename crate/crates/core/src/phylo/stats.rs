use std::cmp::Ordering;
use std::fmt;

use super::PhyloError;

/// Magnitude class of a Cliff's delta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EffectSize {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectSize {
    /// Thresholds 0.147, 0.33 and 0.474 on `|d|`.
    pub fn classify(d: f64) -> Self {
        let d = d.abs();
        if d < 0.147 {
            EffectSize::Negligible
        } else if d < 0.33 {
            EffectSize::Small
        } else if d < 0.474 {
            EffectSize::Medium
        } else {
            EffectSize::Large
        }
    }
}

impl fmt::Display for EffectSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectSize::Negligible => "negligible",
            EffectSize::Small => "small",
            EffectSize::Medium => "medium",
            EffectSize::Large => "large",
        })
    }
}

/// `(#{x > y} - #{x < y}) / (|xs| |ys|)` over all pairs.
pub fn cliffs_delta(xs: &[f64], ys: &[f64]) -> Result<f64, PhyloError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(PhyloError::EmptySample);
    }
    let mut sorted = ys.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &x in xs {
        let below = sorted.partition_point(|&y| y.total_cmp(&x) == Ordering::Less);
        let not_above = sorted.partition_point(|&y| y.total_cmp(&x) != Ordering::Greater);
        let above = sorted.len() - not_above;
        dominance += below as i64 - above as i64;
    }
    Ok(dominance as f64 / (xs.len() * ys.len()) as f64)
}

/// Median with the two middle values averaged; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}
