//! Per-group high/low score pools split at a within-group quantile.

use serde::{Deserialize, Serialize};

use crate::env::{PoolEntry, PoolSet};
use crate::error::{Error, Result};

/// The environment-facing pools plus the split bookkeeping: the quantile
/// used and the per-group cut scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPools {
    pub pools: PoolSet,
    pub quantile: f64,
    pub cut: [f64; 2],
}

/// Linearly interpolated quantile of a sorted slice at h = (n-1)q.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Split each group's rows into a high pool (score >= the group's
/// q-quantile, ties high) and a low pool (the rest).
pub fn build_pools(scores: &[f64], labels: &[u8], groups: &[u8], q: f64) -> Result<GroupPools> {
    if scores.len() != labels.len() || scores.len() != groups.len() {
        return Err(Error::config("pool inputs must have equal lengths"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::config("pool quantile must lie in (0,1)"));
    }
    let mut high: [Vec<PoolEntry>; 2] = [vec![], vec![]];
    let mut low: [Vec<PoolEntry>; 2] = [vec![], vec![]];
    let mut cut = [0.0; 2];
    for g in 0..2u8 {
        let mut member_scores: Vec<f64> = scores
            .iter()
            .zip(groups)
            .filter(|(_, &gg)| gg == g)
            .map(|(&s, _)| s)
            .collect();
        if member_scores.len() < 2 {
            return Err(Error::config(format!(
                "group {g} has {} rows; need at least 2 to split",
                member_scores.len()
            )));
        }
        member_scores.sort_unstable_by(|a, b| a.total_cmp(b));
        let c = sorted_quantile(&member_scores, q);
        cut[g as usize] = c;
        for ((&s, &y), &gg) in scores.iter().zip(labels).zip(groups) {
            if gg != g {
                continue;
            }
            let entry = PoolEntry { score: s, label: y };
            if s >= c {
                high[g as usize].push(entry);
            } else {
                low[g as usize].push(entry);
            }
        }
    }
    // The split partitions each group's rows exactly; a degenerate all-tie
    // group leaves its low pool empty, which the environment constructor
    // rejects as unusable rather than papering over here.
    Ok(GroupPools {
        pools: PoolSet { high, low },
        quantile: q,
        cut,
    })
}
