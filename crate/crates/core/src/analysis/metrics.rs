//! Scalar summaries of run time series: tail means, cumulative violation,
//! cross-seed aggregation.

use crate::error::{Error, Result};

/// Mean of the final `k_tail` entries of a series.
pub fn tail_mean(series: &[f64], k_tail: usize) -> Result<f64> {
    if k_tail == 0 {
        return Err(Error::Analysis("tail_mean needs k_tail >= 1".into()));
    }
    if series.len() < k_tail {
        return Err(Error::Analysis(format!(
            "tail_mean over last {} of a series of length {}",
            k_tail,
            series.len()
        )));
    }
    let tail = &series[series.len() - k_tail..];
    Ok(tail.iter().sum::<f64>() / k_tail as f64)
}

/// Most frequent value among the final `k_tail` entries, with ties broken
/// toward the smaller value.
///
/// Intended for grid-valued series (threshold trajectories of arm-based
/// learners), where repeated values are bit-identical; values are compared
/// exactly.
pub fn tail_mode(series: &[f64], k_tail: usize) -> Result<f64> {
    if k_tail == 0 {
        return Err(Error::Analysis("tail_mode needs k_tail >= 1".into()));
    }
    if series.len() < k_tail {
        return Err(Error::Analysis(format!(
            "tail_mode over last {} of a series of length {}",
            k_tail,
            series.len()
        )));
    }
    let mut tail: Vec<f64> = series[series.len() - k_tail..].to_vec();
    tail.sort_by(f64::total_cmp);
    let mut best = tail[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < tail.len() {
        let mut j = i + 1;
        while j < tail.len() && tail[j] == tail[i] {
            j += 1;
        }
        if j - i > best_count {
            best = tail[i];
            best_count = j - i;
        }
        i = j;
    }
    Ok(best)
}

/// Cumulative constraint violation: total positive-part mass and its running
/// curve.
///
/// Each round contributes the sum of positive parts across its constraints;
/// the curve entry at index t is the total after round t+1.
pub fn cumulative_violation(residuals: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let mut total = 0.0;
    let mut curve = Vec::with_capacity(residuals.len());
    for round in residuals {
        total += round.iter().map(|g| g.max(0.0)).sum::<f64>();
        curve.push(total);
    }
    (total, curve)
}

/// Sample mean and standard deviation (n-1 denominator) of per-seed scalars.
///
/// A single seed yields a defined mean but no std.
pub fn aggregate_seeds(values: &[f64]) -> Result<(f64, Option<f64>)> {
    if values.is_empty() {
        return Err(Error::Analysis("aggregate_seeds over empty input".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok((mean, None));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, Some(var.sqrt())))
}
