//! Paired bootstrap confidence intervals over per-seed metrics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::rng_for_scope;

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Point estimate and percentile interval for a paired mean difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

/// Paired bootstrap CI for `mean(a - b)` over seeds.
///
/// Seed indices are resampled with replacement `resamples` times; the
/// interval is the percentile interval of the resampled mean differences at
/// `(1 - level) / 2` on each side. The bootstrap RNG is its own stream keyed
/// by `scope`, independent of experiment seeds, so CIs are reproducible
/// without perturbing run randomness.
pub fn paired_bootstrap_ci(
    a: &[f64],
    b: &[f64],
    level: f64,
    resamples: usize,
    scope: &str,
) -> Result<BootstrapCi> {
    if a.len() != b.len() {
        return Err(Error::Analysis(format!(
            "paired bootstrap needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Analysis(
            "paired bootstrap needs at least 2 paired values".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Analysis(format!(
            "bootstrap level must be in (0,1), got {level}"
        )));
    }
    if resamples == 0 {
        return Err(Error::Analysis("bootstrap needs at least 1 resample".into()));
    }

    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = diffs.len();
    let point = diffs.iter().sum::<f64>() / m as f64;

    let mut rng = rng_for_scope(scope);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut sum = 0.0;
        for _ in 0..m {
            sum += diffs[rng.random_range(0..m)];
        }
        means.push(sum / m as f64);
    }
    means.sort_by(|x, y| x.total_cmp(y));

    let alpha = (1.0 - level) / 2.0;
    let lo = percentile_sorted(&means, alpha);
    let hi = percentile_sorted(&means, 1.0 - alpha);
    Ok(BootstrapCi {
        point,
        lo: lo.min(point),
        hi: hi.max(point),
        level,
    })
}

/// Linear-interpolation percentile of an ascending slice (the same
/// h = (n-1)q rule used for pool quantiles).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = h - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constant_difference_collapses_interval() {
        let a = [1.5, 2.5, 3.5, 4.5];
        let b = [1.0, 2.0, 3.0, 4.0];
        let ci = paired_bootstrap_ci(&a, &b, 0.95, 2000, "test/bootstrap/const").unwrap();
        assert!((ci.point - 0.5).abs() < 1e-12);
        assert!((ci.lo - 0.5).abs() < 1e-12);
        assert!((ci.hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_samples_give_zero_point_and_cover_zero() {
        let a = [0.3, 0.7, 0.1, 0.9, 0.4];
        let ci = paired_bootstrap_ci(&a, &a, 0.95, 2000, "test/bootstrap/same").unwrap();
        assert_eq!(ci.point, 0.0);
        assert!(ci.lo <= 0.0 && 0.0 <= ci.hi);
    }

    #[test]
    fn interval_brackets_point() {
        let mut rng = crate::seeding::rng_for_scope("test/bootstrap/bracket");
        for trial in 0..20 {
            let m = rng.random_range(2..12);
            let a: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let scope = format!("test/bootstrap/bracket/{trial}");
            let ci = paired_bootstrap_ci(&a, &b, 0.95, 500, &scope).unwrap();
            assert!(ci.lo <= ci.point && ci.point <= ci.hi);
        }
    }

    #[test]
    fn deterministic_given_scope() {
        // Enough distinct paired differences that the bootstrap distribution
        // is effectively continuous; two scopes then almost surely disagree
        // on the exact endpoints while one scope must reproduce itself.
        let a = [
            0.21, 0.53, 0.94, 0.37, 0.68, 0.11, 0.45, 0.82, 0.29, 0.76, 0.58, 0.63,
        ];
        let b = [
            0.13, 0.61, 0.79, 0.24, 0.92, 0.03, 0.51, 0.77, 0.40, 0.66, 0.49, 0.71,
        ];
        let x = paired_bootstrap_ci(&a, &b, 0.95, 3000, "test/bootstrap/det").unwrap();
        let y = paired_bootstrap_ci(&a, &b, 0.95, 3000, "test/bootstrap/det").unwrap();
        assert_eq!(x, y);
        let z = paired_bootstrap_ci(&a, &b, 0.95, 3000, "test/bootstrap/det2").unwrap();
        assert!(z.lo != x.lo || z.hi != x.hi);
    }

    #[test]
    fn matches_high_resample_reference_within_monte_carlo_error() {
        // Two independent bootstrap streams at large B should agree on the
        // interval endpoints to within Monte Carlo noise.
        let mut rng = crate::seeding::rng_for_scope("test/bootstrap/ref-data");
        let m = 10;
        let a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let big = paired_bootstrap_ci(&a, &b, 0.95, 100_000, "test/bootstrap/ref-a").unwrap();
        let other = paired_bootstrap_ci(&a, &b, 0.95, 100_000, "test/bootstrap/ref-b").unwrap();
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let mean = diffs.iter().sum::<f64>() / m as f64;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
        let tol = 3.0 * sd / (m as f64).sqrt() * 0.1;
        assert!((big.lo - other.lo).abs() < tol, "{} vs {}", big.lo, other.lo);
        assert!((big.hi - other.hi).abs() < tol, "{} vs {}", big.hi, other.hi);
    }

    #[test]
    fn wider_level_widens_interval() {
        let a = [0.2, 0.9, 0.4, 0.6, 0.1, 0.8];
        let b = [0.3, 0.5, 0.7, 0.2, 0.4, 0.6];
        let narrow = paired_bootstrap_ci(&a, &b, 0.5, 20_000, "test/bootstrap/width").unwrap();
        let wide = paired_bootstrap_ci(&a, &b, 0.99, 20_000, "test/bootstrap/width").unwrap();
        assert!(wide.hi - wide.lo >= narrow.hi - narrow.lo);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(paired_bootstrap_ci(&[1.0, 2.0], &[1.0], 0.95, 10, "s").is_err());
        assert!(paired_bootstrap_ci(&[1.0], &[1.0], 0.95, 10, "s").is_err());
        assert!(paired_bootstrap_ci(&[1.0, 2.0], &[1.0, 2.0], 1.0, 10, "s").is_err());
        assert!(paired_bootstrap_ci(&[1.0, 2.0], &[1.0, 2.0], 0.95, 0, "s").is_err());
    }

    #[test]
    fn percentile_interpolates_linearly() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert!((percentile_sorted(&sorted, 0.0) - 1.0).abs() < 1e-15);
        assert!((percentile_sorted(&sorted, 1.0) - 4.0).abs() < 1e-15);
        assert!((percentile_sorted(&sorted, 0.5) - 2.5).abs() < 1e-15);
        assert!((percentile_sorted(&sorted, 0.25) - 1.75).abs() < 1e-15);
    }
}
