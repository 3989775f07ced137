//! Synthetic mean-shift environment.
//!
//! Scores are Gaussian with a per-group mean that responds to how generously
//! that group was accepted: `μ_a ← (1−ρ)·m_a + ρ·μ_a + κ·(acc_a − 0.5)`,
//! clipped to the box `m_a ± κ/(1−ρ)`. Labels follow a sigmoid model
//! `y ~ Bernoulli(sigmoid(w·s + b))`, so accepting more of a group lifts its
//! score distribution and with it the realized label quality.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{contract_update, EnvDescriptor, Environment};
use crate::error::{Error, Result};
use crate::policy::{compute_observation, ConstraintSpec, IndividualBatch, Observation};
use crate::seeding::rng_for_scope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvesConfig {
    /// Base means (m_0, m_1) the state contracts toward.
    pub base_means: [f64; 2],
    /// Score noise σ.
    pub sigma: f64,
    /// Contraction rate ρ ∈ (0, 1).
    pub rho: f64,
    /// Acceptance sensitivity κ.
    pub kappa: f64,
    /// P(a = 1) when sampling an individual's group.
    pub group_prob: f64,
    /// Label model: y ~ Bernoulli(sigmoid(label_weight·s + label_bias)).
    pub label_weight: f64,
    pub label_bias: f64,
    pub batch_size: usize,
    pub c_fp: f64,
    pub constraints: ConstraintSpec,
}

impl MvesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config(format!(
                "mves rho must lie in (0,1), got {}",
                self.rho
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::config("mves sigma must be positive"));
        }
        if self.batch_size < 1 {
            return Err(Error::config("mves batch_size must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.group_prob) {
            return Err(Error::config("mves group_prob must lie in [0,1]"));
        }
        if !(self.c_fp > 0.0) {
            return Err(Error::config("mves c_fp must be positive"));
        }
        if self.kappa < 0.0 {
            return Err(Error::config("mves kappa must be >= 0"));
        }
        self.constraints.validate()
    }

    /// Half-width of the state bounding box, κ/(1−ρ).
    pub fn box_half_width(&self) -> f64 {
        self.kappa / (1.0 - self.rho)
    }
}

pub struct MvesEnv {
    cfg: MvesConfig,
    mu: [f64; 2],
    rng: ChaCha8Rng,
    frozen: bool,
}

impl MvesEnv {
    pub fn new(cfg: MvesConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut env = Self {
            mu: cfg.base_means,
            rng: rng_for_scope("mves/unseeded"),
            cfg,
            frozen: false,
        };
        env.reset(seed);
        Ok(env)
    }

    pub fn mu(&self) -> [f64; 2] {
        self.mu
    }

    fn sample_batch(&mut self) -> IndividualBatch {
        let n = self.cfg.batch_size;
        let mut scores = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut groups = Vec::with_capacity(n);
        for _ in 0..n {
            let a = u8::from(self.rng.random_bool(self.cfg.group_prob));
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let s = self.mu[a as usize] + self.cfg.sigma * z;
            let p = sigmoid(self.cfg.label_weight * s + self.cfg.label_bias);
            let y = u8::from(self.rng.random_bool(p));
            groups.push(a);
            scores.push(s);
            labels.push(y);
        }
        IndividualBatch::new(scores, labels, groups).expect("sampled batch is well-formed")
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Environment for MvesEnv {
    fn reset(&mut self, seed: u64) {
        self.mu = self.cfg.base_means;
        self.rng = rng_for_scope(&format!("mves/seed={seed}"));
        // Freezing survives reset; it is a structural property of the
        // instance, not part of the trajectory state.
    }

    fn step(&mut self, theta: f64) -> Observation {
        let batch = self.sample_batch();
        let obs = compute_observation(&batch, theta, self.cfg.c_fp, &self.cfg.constraints);
        if !self.frozen {
            let half = self.cfg.box_half_width();
            for g in 0..2 {
                let base = self.cfg.base_means[g];
                let next = contract_update(
                    self.mu[g],
                    base,
                    self.cfg.rho,
                    self.cfg.kappa,
                    obs.accept_rate_by_group[g],
                    0.5,
                );
                self.mu[g] = next.clamp(base - half, base + half);
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
        json!({ "family": "mves", "mu": self.mu, "frozen": self.frozen })
    }
}
