//! Unconstrained zeroth-order baseline.
//!
//! Keeps a base point `θ̄` and plays `θ_t = Π(θ̄ + σ_p u_t)` with a Rademacher
//! direction `u_t ∈ {-1, +1}`. The one-point gradient estimate is
//! `ĝrad = -(r_t / σ_p) u_t` and the base moves by
//! `θ̄ ← Π(θ̄ - η ĝrad)`. Both `σ_p` and `η` scale with the grid range; the
//! learner reads only the reward from each observation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Learner;
use crate::error::{Error, Result};
use crate::policy::Observation;
use crate::seeding::rng_for_scope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoConfig {
    /// Perturbation size as a fraction of the threshold range.
    pub sigma_scale: f64,
    /// Step size as a fraction of the threshold range.
    pub step_scale: f64,
}

impl Default for ZoConfig {
    fn default() -> Self {
        Self {
            sigma_scale: 0.1,
            step_scale: 0.02,
        }
    }
}

impl ZoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_scale > 0.0 && self.sigma_scale.is_finite()) {
            return Err(Error::config("zo sigma_scale must be positive"));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::config("zo step_scale must be positive"));
        }
        Ok(())
    }
}

pub struct ZoLearner {
    lo: f64,
    hi: f64,
    base: f64,
    sigma_p: f64,
    eta: f64,
    rng: ChaCha8Rng,
    last_dir: Option<f64>,
}

impl ZoLearner {
    pub fn new(lo: f64, hi: f64, cfg: ZoConfig, scope: &str) -> Result<Self> {
        cfg.validate()?;
        if !(lo < hi) {
            return Err(Error::config("zo threshold range must satisfy lo < hi"));
        }
        let range = hi - lo;
        Ok(Self {
            lo,
            hi,
            base: lo + range / 2.0,
            sigma_p: cfg.sigma_scale * range,
            eta: cfg.step_scale * range,
            rng: rng_for_scope(scope),
            last_dir: None,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.lo, self.hi)
    }

    /// Apply the one-point estimator for the most recent direction.
    pub fn observe_reward(&mut self, reward: f64) {
        let u = self.last_dir.take().expect("reward without a proposal");
        let grad = -(reward / self.sigma_p) * u;
        self.base = self.clamp(self.base - self.eta * grad);
    }
}

impl Learner for ZoLearner {
    fn name(&self) -> &'static str {
        "unconstrained"
    }

    fn propose(&mut self, _t: u64) -> f64 {
        assert!(
            self.last_dir.is_none(),
            "propose called twice without an update"
        );
        let u = if self.rng.random::<bool>() { 1.0 } else { -1.0 };
        self.last_dir = Some(u);
        self.clamp(self.base + self.sigma_p * u)
    }

    fn update(&mut self, _theta: f64, obs: &Observation) {
        self.observe_reward(obs.reward);
    }

    fn snapshot(&self) -> Value {
        json!({
            "algo": "unconstrained",
            "base": self.base,
            "sigma_p": self.sigma_p,
            "eta": self.eta,
        })
    }
}
