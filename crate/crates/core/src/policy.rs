//! Threshold policies, batch utility, and constraint residuals.
//!
//! A policy is a single scalar threshold θ applied to scores: accept
//! individual `k` iff `s_k >= θ` (ties accept). One round of interaction
//! yields an [`Observation`]: the batch utility
//! `(1/n) Σ d_k (y_k − c_fp (1 − y_k))`, the demographic-parity gap
//! `|acc_0 − acc_1|`, and constraint residuals `g_j` whose feasibility
//! convention is `g_j <= 0`. Residual order is fixed as
//! `(dp, srv_low, srv_high)` so downstream logs stay column-stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of candidate thresholds, inclusive of both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    theta_min: f64,
    theta_max: f64,
    points: Vec<f64>,
}

impl ThresholdGrid {
    /// Build a uniform grid with `k_theta` points spanning
    /// `[theta_min, theta_max]`.
    pub fn uniform(theta_min: f64, theta_max: f64, k_theta: usize) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite()) {
            return Err(Error::config("grid endpoints must be finite"));
        }
        if theta_min >= theta_max {
            return Err(Error::config(format!(
                "grid requires theta_min < theta_max, got [{theta_min}, {theta_max}]"
            )));
        }
        if k_theta < 2 {
            return Err(Error::config(format!(
                "grid requires at least 2 points, got {k_theta}"
            )));
        }
        let span = theta_max - theta_min;
        let points = (0..k_theta)
            .map(|i| theta_min + span * (i as f64) / ((k_theta - 1) as f64))
            .collect();
        Ok(Self {
            theta_min,
            theta_max,
            points,
        })
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Number of grid points K_θ.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn spacing(&self) -> f64 {
        (self.theta_max - self.theta_min) / ((self.points.len() - 1) as f64)
    }
}

/// One batch of individuals: score, binary label, binary group per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualBatch {
    scores: Vec<f64>,
    labels: Vec<u8>,
    groups: Vec<u8>,
}

impl IndividualBatch {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>, groups: Vec<u8>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::config("batch must contain at least one individual"));
        }
        if scores.len() != labels.len() || scores.len() != groups.len() {
            return Err(Error::config(format!(
                "batch arrays must have equal length: scores={}, labels={}, groups={}",
                scores.len(),
                labels.len(),
                groups.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::config("batch scores must be finite"));
        }
        if labels.iter().any(|&y| y > 1) || groups.iter().any(|&a| a > 1) {
            return Err(Error::config("labels and groups must be 0 or 1"));
        }
        Ok(Self {
            scores,
            labels,
            groups,
        })
    }

    pub fn n(&self) -> usize {
        self.scores.len()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn groups(&self) -> &[u8] {
        &self.groups
    }
}

/// Constraint configuration: DP tolerance ε plus an optional acceptance-rate
/// window `[alpha_min, alpha_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub epsilon: f64,
    pub service_enabled: bool,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl ConstraintSpec {
    /// DP constraint only (J = 1).
    pub fn dp_only(epsilon: f64) -> Result<Self> {
        let spec = Self {
            epsilon,
            service_enabled: false,
            alpha_min: 0.0,
            alpha_max: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// DP constraint plus service window (J = 3).
    pub fn with_service(epsilon: f64, alpha_min: f64, alpha_max: f64) -> Result<Self> {
        let spec = Self {
            epsilon,
            service_enabled: true,
            alpha_min,
            alpha_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if self.service_enabled {
            if !(0.0..=1.0).contains(&self.alpha_min) || !(0.0..=1.0).contains(&self.alpha_max) {
                return Err(Error::config("service window bounds must lie in [0,1]"));
            }
            if self.alpha_min > self.alpha_max {
                return Err(Error::config(format!(
                    "service window requires alpha_min <= alpha_max, got [{}, {}]",
                    self.alpha_min, self.alpha_max
                )));
            }
        }
        Ok(())
    }

    /// Residual dimensionality J.
    pub fn residual_dim(&self) -> usize {
        if self.service_enabled {
            3
        } else {
            1
        }
    }

    /// Whether steady-state estimates satisfy every constraint. Comparisons
    /// are strict `<=` on the point estimates; adding slack here would
    /// silently change sweep oracles and stress winners.
    pub fn satisfied_by(&self, dp_gap: f64, accept_rate: f64) -> bool {
        dp_gap <= self.epsilon
            && (!self.service_enabled
                || (accept_rate >= self.alpha_min && accept_rate <= self.alpha_max))
    }
}

/// Everything revealed by one round of play at a single threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub reward: f64,
    /// Constraint residuals in fixed order (dp, srv_low, srv_high);
    /// length 1 when the service window is disabled.
    pub residuals: Vec<f64>,
    pub dp_gap: f64,
    pub accept_rate: f64,
    /// Per-group acceptance rates; `None` marks a group absent from the
    /// batch, in which case the gap is reported as 0 for that round.
    pub accept_rate_by_group: [Option<f64>; 2],
}

impl Observation {
    /// True when both groups appeared in the batch.
    pub fn dp_measured(&self) -> bool {
        self.accept_rate_by_group.iter().all(Option::is_some)
    }
}

/// Accept iff score >= θ.
pub fn apply_policy(batch: &IndividualBatch, theta: f64) -> Vec<u8> {
    batch
        .scores()
        .iter()
        .map(|&s| u8::from(s >= theta))
        .collect()
}

/// Mean per-individual utility of a decision vector:
/// `(1/n) Σ d_k (y_k − c_fp (1 − y_k))`.
pub fn batch_reward(batch: &IndividualBatch, decisions: &[u8], c_fp: f64) -> f64 {
    assert_eq!(decisions.len(), batch.n(), "decision vector length mismatch");
    assert!(c_fp > 0.0, "false-positive cost must be positive");
    let total: f64 = batch
        .labels()
        .iter()
        .zip(decisions)
        .map(|(&y, &d)| {
            if d == 1 {
                f64::from(y) - c_fp * f64::from(1 - y)
            } else {
                0.0
            }
        })
        .sum();
    total / batch.n() as f64
}

/// Score one round of play: reward, acceptance rates, DP gap, residuals.
pub fn compute_observation(
    batch: &IndividualBatch,
    theta: f64,
    c_fp: f64,
    spec: &ConstraintSpec,
) -> Observation {
    let decisions = apply_policy(batch, theta);
    let reward = batch_reward(batch, &decisions, c_fp);

    let mut count = [0usize; 2];
    let mut accepted = [0usize; 2];
    for (&a, &d) in batch.groups().iter().zip(&decisions) {
        count[a as usize] += 1;
        accepted[a as usize] += usize::from(d == 1);
    }
    let accept_rate_by_group = [0, 1].map(|g| {
        if count[g] > 0 {
            Some(accepted[g] as f64 / count[g] as f64)
        } else {
            None
        }
    });
    let accept_rate = (accepted[0] + accepted[1]) as f64 / batch.n() as f64;
    let dp_gap = match (accept_rate_by_group[0], accept_rate_by_group[1]) {
        (Some(r0), Some(r1)) => (r0 - r1).abs(),
        _ => 0.0,
    };

    let mut residuals = Vec::with_capacity(spec.residual_dim());
    residuals.push(dp_gap - spec.epsilon);
    if spec.service_enabled {
        residuals.push(spec.alpha_min - accept_rate);
        residuals.push(accept_rate - spec.alpha_max);
    }

    Observation {
        reward,
        residuals,
        dp_gap,
        accept_rate,
        accept_rate_by_group,
    }
}

/// `Σ_j max(g_j, 0)` — per-round contribution to cumulative violation.
pub fn positive_part_sum(residuals: &[f64]) -> f64 {
    residuals.iter().map(|g| g.max(0.0)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(scores: Vec<f64>, labels: Vec<u8>, groups: Vec<u8>) -> IndividualBatch {
        IndividualBatch::new(scores, labels, groups).unwrap()
    }

    #[test]
    fn grid_three_points() {
        let g = ThresholdGrid::uniform(0.0, 1.0, 3).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_endpoints_only() {
        let g = ThresholdGrid::uniform(0.0, 1.0, 2).unwrap();
        assert_eq!(g.points(), &[0.0, 1.0]);
    }

    #[test]
    fn grid_main_shape() {
        let g = ThresholdGrid::uniform(-4.0, 4.0, 41).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g.point(0), -4.0);
        assert_eq!(g.point(40), 4.0);
        assert!((g.spacing() - 0.2).abs() < 1e-12);
        // spacing constant to within 1e-12 relative error
        for w in g.points().windows(2) {
            let step = w[1] - w[0];
            assert!((step - g.spacing()).abs() <= 1e-12 * g.spacing().abs());
        }
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        assert!(ThresholdGrid::uniform(1.0, 0.0, 5).is_err());
        assert!(ThresholdGrid::uniform(0.0, 0.0, 5).is_err());
        assert!(ThresholdGrid::uniform(0.0, 1.0, 1).is_err());
        assert!(ThresholdGrid::uniform(f64::NAN, 1.0, 5).is_err());
    }

    #[test]
    fn policy_boundary_accepts() {
        let b = batch(vec![-1.0, 0.0, 2.0], vec![0, 0, 0], vec![0, 0, 0]);
        assert_eq!(apply_policy(&b, 0.0), vec![0, 1, 1]);
    }

    #[test]
    fn policy_all_reject() {
        let b = batch(vec![5.0, 5.0], vec![0, 0], vec![0, 0]);
        assert_eq!(apply_policy(&b, 10.0), vec![0, 0]);
    }

    #[test]
    fn policy_tie_cases() {
        let b = batch(
            vec![0.3, 0.7, 0.7, 0.9],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
        );
        assert_eq!(apply_policy(&b, 0.7), vec![0, 1, 1, 1]);
    }

    #[test]
    fn reward_hand_sum() {
        let b = batch(vec![0.0; 4], vec![1, 0, 1, 0], vec![0, 0, 0, 0]);
        let r = batch_reward(&b, &[1, 1, 0, 0], 0.5);
        assert!((r - 0.125).abs() < 1e-12);
    }

    #[test]
    fn reward_no_accepts() {
        let b = batch(vec![0.0; 4], vec![1, 0, 1, 0], vec![0, 0, 0, 0]);
        assert_eq!(batch_reward(&b, &[0, 0, 0, 0], 0.5), 0.0);
    }

    #[test]
    fn reward_single_false_positive() {
        let b = batch(vec![0.0], vec![0], vec![0]);
        let r = batch_reward(&b, &[1], 0.3);
        assert!((r - (-0.3)).abs() < 1e-12);
    }

    #[test]
    fn observation_dp_gap() {
        // group 0: accepts 1 of 2 (acc 0.5); group 1: accepts 3 of 10 (acc 0.3)
        let mut scores = vec![1.0, -1.0];
        let mut groups = vec![0, 0];
        scores.extend([1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0]);
        groups.extend([1; 10]);
        let n = scores.len();
        let b = batch(scores, vec![1; n], groups);
        let spec = ConstraintSpec::dp_only(0.06).unwrap();
        let obs = compute_observation(&b, 0.0, 0.5, &spec);
        assert!((obs.dp_gap - 0.2).abs() < 1e-12);
        assert!((obs.residuals[0] - 0.14).abs() < 1e-12);
        assert_eq!(obs.residuals.len(), 1);
    }

    #[test]
    fn observation_service_residuals() {
        // acceptance rate 0.2 against window [0.30, 0.99]
        let scores = vec![1.0, -1.0, -1.0, -1.0, -1.0];
        let b = batch(scores, vec![1; 5], vec![0, 0, 0, 1, 1]);
        let spec = ConstraintSpec::with_service(0.06, 0.30, 0.99).unwrap();
        let obs = compute_observation(&b, 0.0, 0.5, &spec);
        assert!((obs.accept_rate - 0.2).abs() < 1e-12);
        assert!((obs.residuals[1] - 0.10).abs() < 1e-12);
        assert!((obs.residuals[2] - (-0.79)).abs() < 1e-12);
    }

    #[test]
    fn observation_single_group_batch() {
        let b = batch(vec![1.0, -1.0], vec![1, 1], vec![0, 0]);
        let spec = ConstraintSpec::dp_only(0.06).unwrap();
        let obs = compute_observation(&b, 0.0, 0.5, &spec);
        assert_eq!(obs.dp_gap, 0.0);
        assert_eq!(obs.accept_rate_by_group[1], None);
        assert!(!obs.dp_measured());
    }

    #[test]
    fn positive_part_examples() {
        assert!((positive_part_sum(&[0.1, -0.2, 0.05]) - 0.15).abs() < 1e-12);
        assert_eq!(positive_part_sum(&[-1.0, -0.5]), 0.0);
        assert_eq!(positive_part_sum(&[0.0]), 0.0);
    }

    #[test]
    fn constraint_spec_validation() {
        assert!(ConstraintSpec::dp_only(-0.1).is_err());
        assert!(ConstraintSpec::with_service(0.05, 0.9, 0.3).is_err());
        assert!(ConstraintSpec::with_service(0.05, -0.1, 0.5).is_err());
        assert_eq!(ConstraintSpec::dp_only(0.06).unwrap().residual_dim(), 1);
        assert_eq!(
            ConstraintSpec::with_service(0.06, 0.3, 0.99)
                .unwrap()
                .residual_dim(),
            3
        );
    }

    proptest! {
        #[test]
        fn policy_anti_monotone_in_theta(
            scores in proptest::collection::vec(-10.0f64..10.0, 1..64),
            lo in -10.0f64..10.0,
            bump in 0.0f64..5.0,
        ) {
            let n = scores.len();
            let b = batch(scores, vec![0; n], vec![0; n]);
            let d_lo = apply_policy(&b, lo);
            let d_hi = apply_policy(&b, lo + bump);
            for (a, z) in d_lo.iter().zip(&d_hi) {
                prop_assert!(z <= a, "raising theta turned a reject into an accept");
            }
        }

        #[test]
        fn reward_linear_in_decisions(
            labels in proptest::collection::vec(0u8..2, 1..32),
            decisions in proptest::collection::vec(0u8..2, 1..32),
            c_fp in 0.01f64..3.0,
        ) {
            let n = labels.len().min(decisions.len());
            let labels = labels[..n].to_vec();
            let decisions = decisions[..n].to_vec();
            let b = batch(vec![0.0; n], labels.clone(), vec![0; n]);
            let whole = batch_reward(&b, &decisions, c_fp);
            let mut parts = 0.0;
            for k in 0..n {
                let mut single = vec![0u8; n];
                single[k] = decisions[k];
                parts += batch_reward(&b, &single, c_fp);
            }
            prop_assert!((whole - parts).abs() < 1e-9);
        }

        #[test]
        fn observation_invariants(
            scores in proptest::collection::vec(-5.0f64..5.0, 1..128),
            theta in -5.0f64..5.0,
            eps in 0.0f64..0.5,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = scores.len();
            let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let groups: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let b = batch(scores, labels, groups.clone());
            let spec = ConstraintSpec::with_service(eps, 0.2, 0.8).unwrap();
            let obs = compute_observation(&b, theta, 0.5, &spec);
            prop_assert!(obs.residuals[0] >= -eps - 1e-12);
            prop_assert!(obs.dp_gap >= 0.0);
            // accept_rate is the group-size-weighted mean of group rates
            let n0 = groups.iter().filter(|&&a| a == 0).count();
            let n1 = n - n0;
            let mut acc = 0.0;
            if let Some(r0) = obs.accept_rate_by_group[0] { acc += r0 * n0 as f64; }
            if let Some(r1) = obs.accept_rate_by_group[1] { acc += r1 * n1 as f64; }
            prop_assert!((obs.accept_rate - acc / n as f64).abs() < 1e-12);
        }
    }
}
