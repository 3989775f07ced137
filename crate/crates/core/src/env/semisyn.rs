//! Composition-shift environment over dataset score pools.
//!
//! Each group carries a high-score pool and a low-score pool of
//! `(score, label)` pairs built offline from a real dataset. The latent
//! state is the per-group mixture weight `w_a` on the high pool:
//! `w_a ← clip((1−ρ)·w_init + ρ·w_a + κ·(acc_a − 0.5), w_lo, w_hi)`.
//! Accepting a group generously raises its high-score fraction next round;
//! starving it drains the pool mixture toward the low stratum.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{contract_update, EnvDescriptor, Environment};
use crate::error::{Error, Result};
use crate::policy::{compute_observation, ConstraintSpec, IndividualBatch, Observation};
use crate::seeding::rng_for_scope;

/// One pooled individual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub score: f64,
    pub label: u8,
}

/// Per-group high/low strata, indexed by group. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSet {
    pub high: [Vec<PoolEntry>; 2],
    pub low: [Vec<PoolEntry>; 2],
}

impl PoolSet {
    pub fn validate(&self) -> Result<()> {
        for g in 0..2 {
            if self.high[g].is_empty() {
                return Err(Error::config(format!("high pool empty for group {g}")));
            }
            if self.low[g].is_empty() {
                return Err(Error::config(format!("low pool empty for group {g}")));
            }
        }
        Ok(())
    }

    /// Total number of pooled individuals.
    pub fn len(&self) -> usize {
        self.high.iter().chain(self.low.iter()).map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiSynConfig {
    /// Contraction rate ρ ∈ (0, 1).
    pub rho: f64,
    /// Acceptance sensitivity κ.
    pub kappa: f64,
    /// Weight the state contracts toward, and the initial weight.
    pub w_init: f64,
    pub w_lo: f64,
    pub w_hi: f64,
    /// Reference acceptance rate in the forcing term.
    pub acc_ref: f64,
    /// P(a = 1) when sampling an individual's group.
    pub group_prob: f64,
    pub batch_size: usize,
    pub c_fp: f64,
    pub constraints: ConstraintSpec,
}

impl SemiSynConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config(format!(
                "semisyn rho must lie in (0,1), got {}",
                self.rho
            )));
        }
        if !(0.0 <= self.w_lo && self.w_lo <= self.w_hi && self.w_hi <= 1.0) {
            return Err(Error::config("semisyn requires 0 <= w_lo <= w_hi <= 1"));
        }
        if !(self.w_lo..=self.w_hi).contains(&self.w_init) {
            return Err(Error::config("semisyn w_init must lie in [w_lo, w_hi]"));
        }
        if self.batch_size < 1 {
            return Err(Error::config("semisyn batch_size must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.group_prob) {
            return Err(Error::config("semisyn group_prob must lie in [0,1]"));
        }
        if !(self.c_fp > 0.0) {
            return Err(Error::config("semisyn c_fp must be positive"));
        }
        if self.kappa < 0.0 {
            return Err(Error::config("semisyn kappa must be >= 0"));
        }
        self.constraints.validate()
    }
}

pub struct SemiSynEnv {
    cfg: SemiSynConfig,
    pools: PoolSet,
    w: [f64; 2],
    rng: ChaCha8Rng,
    frozen: bool,
}

impl SemiSynEnv {
    pub fn new(pools: PoolSet, cfg: SemiSynConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        pools.validate()?;
        let mut env = Self {
            w: [cfg.w_init, cfg.w_init],
            cfg,
            pools,
            rng: rng_for_scope("semisyn/unseeded"),
            frozen: false,
        };
        env.reset(seed);
        Ok(env)
    }

    pub fn weights(&self) -> [f64; 2] {
        self.w
    }

    fn sample_batch(&mut self) -> IndividualBatch {
        let n = self.cfg.batch_size;
        let mut scores = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut groups = Vec::with_capacity(n);
        for _ in 0..n {
            let a = u8::from(self.rng.random_bool(self.cfg.group_prob));
            let high = self.rng.random_bool(self.w[a as usize]);
            let pool = if high {
                &self.pools.high[a as usize]
            } else {
                &self.pools.low[a as usize]
            };
            let entry = pool[self.rng.random_range(0..pool.len())];
            groups.push(a);
            scores.push(entry.score);
            labels.push(entry.label);
        }
        IndividualBatch::new(scores, labels, groups).expect("sampled batch is well-formed")
    }
}

impl Environment for SemiSynEnv {
    fn reset(&mut self, seed: u64) {
        self.w = [self.cfg.w_init, self.cfg.w_init];
        self.rng = rng_for_scope(&format!("semisyn/seed={seed}"));
    }

    fn step(&mut self, theta: f64) -> Observation {
        let batch = self.sample_batch();
        let obs = compute_observation(&batch, theta, self.cfg.c_fp, &self.cfg.constraints);
        if !self.frozen {
            for g in 0..2 {
                let next = contract_update(
                    self.w[g],
                    self.cfg.w_init,
                    self.cfg.rho,
                    self.cfg.kappa,
                    obs.accept_rate_by_group[g],
                    self.cfg.acc_ref,
                );
                self.w[g] = next.clamp(self.cfg.w_lo, self.cfg.w_hi);
            }
        }
        obs
    }

    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            c_fp: self.cfg.c_fp,
            constraints: self.cfg.constraints,
            batch_size: self.cfg.batch_size,
        }
    }

    fn freeze(&mut self) {
        self.frozen = true;
    }

    fn state_snapshot(&self) -> Value {
        json!({ "family": "semisyn", "w": self.w, "frozen": self.frozen })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entries(pairs: &[(f64, u8)]) -> Vec<PoolEntry> {
        pairs
            .iter()
            .map(|&(score, label)| PoolEntry { score, label })
            .collect()
    }

    pub(crate) fn test_pools() -> PoolSet {
        PoolSet {
            high: [
                entries(&[(1.0, 1), (1.5, 1), (2.0, 1), (0.8, 0)]),
                entries(&[(1.4, 1), (1.9, 1), (2.6, 1), (1.2, 1)]),
            ],
            low: [
                entries(&[(-2.0, 0), (-1.0, 0), (-0.4, 1), (-1.5, 0)]),
                entries(&[(-0.8, 0), (-0.2, 1), (-1.1, 0), (0.1, 1)]),
            ],
        }
    }

    pub(crate) fn test_config() -> SemiSynConfig {
        SemiSynConfig {
            rho: 0.9,
            kappa: 0.3,
            w_init: 0.5,
            w_lo: 0.05,
            w_hi: 0.95,
            acc_ref: 0.5,
            group_prob: 0.5,
            batch_size: 256,
            c_fp: 0.5,
            constraints: ConstraintSpec::with_service(0.02, 0.30, 0.99).unwrap(),
        }
    }

    #[test]
    fn reset_starts_symmetric() {
        let env = SemiSynEnv::new(test_pools(), test_config(), 0).unwrap();
        assert_eq!(env.weights(), [0.5, 0.5]);
    }

    #[test]
    fn empty_pool_rejected() {
        let mut pools = test_pools();
        pools.high[1].clear();
        assert!(SemiSynEnv::new(pools, test_config(), 0).is_err());
    }

    #[test]
    fn same_seed_same_batches() {
        let thetas = [-2.0, 0.5, 1.3, -0.7];
        let mut a = SemiSynEnv::new(test_pools(), test_config(), 21).unwrap();
        let mut b = SemiSynEnv::new(test_pools(), test_config(), 21).unwrap();
        for &t in &thetas {
            assert_eq!(
                serde_json::to_string(&a.step(t)).unwrap(),
                serde_json::to_string(&b.step(t)).unwrap()
            );
        }
    }

    #[test]
    fn kappa_zero_contracts_to_w_init() {
        let mut cfg = test_config();
        cfg.kappa = 0.0;
        cfg.w_init = 0.7;
        let mut env = SemiSynEnv::new(test_pools(), cfg, 0).unwrap();
        // knock the state around first, then watch it return
        for _ in 0..300 {
            env.step(0.0);
        }
        assert!((env.weights()[0] - 0.7).abs() < 1e-9);
        assert!((env.weights()[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn accept_all_hits_high_clip() {
        // theta below every pooled score: acc_a = 1 each round, fixed point
        // w_init + kappa*0.5/(1-rho) = 0.5 + 1.5, clipped to w_hi.
        let cfg = test_config();
        let mut env = SemiSynEnv::new(test_pools(), cfg.clone(), 2).unwrap();
        for _ in 0..300 {
            env.step(-10.0);
        }
        assert!((env.weights()[0] - cfg.w_hi).abs() < 1e-12);
        assert!((env.weights()[1] - cfg.w_hi).abs() < 1e-12);
    }

    #[test]
    fn reject_all_hits_low_clip() {
        let cfg = test_config();
        let mut env = SemiSynEnv::new(test_pools(), cfg.clone(), 2).unwrap();
        for _ in 0..300 {
            env.step(10.0);
        }
        assert!((env.weights()[0] - cfg.w_lo).abs() < 1e-12);
        assert!((env.weights()[1] - cfg.w_lo).abs() < 1e-12);
    }

    #[test]
    fn frozen_keeps_weights() {
        let mut env = SemiSynEnv::new(test_pools(), test_config(), 4).unwrap();
        env.freeze();
        for _ in 0..50 {
            env.step(-10.0);
        }
        assert_eq!(env.weights(), [0.5, 0.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn weights_stay_clipped(seed in 0u64..500, thetas in proptest::collection::vec(-4.0f64..4.0, 1..60)) {
            let mut cfg = test_config();
            cfg.batch_size = 16;
            let mut env = SemiSynEnv::new(test_pools(), cfg.clone(), seed).unwrap();
            for &t in &thetas {
                env.step(t);
                for g in 0..2 {
                    prop_assert!(env.weights()[g] >= cfg.w_lo - 1e-12);
                    prop_assert!(env.weights()[g] <= cfg.w_hi + 1e-12);
                }
            }
        }
    }
}
