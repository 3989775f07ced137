//! Primal-dual zeroth-order baseline.
//!
//! Runs the same one-point perturbation scheme as the unconstrained learner,
//! but on the Lagrangian `L = -r + Σ_j λ_j g_j`. Each round takes the primal
//! step with the multipliers held at their pre-update values, then projects
//! the dual ascent step: `λ_j ← max(0, λ_j + μ g_j)`. The primal step size is
//! `η` times the threshold range, matching how the unconstrained baseline
//! scales its knobs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Learner;
use crate::error::{Error, Result};
use crate::policy::Observation;
use crate::seeding::rng_for_scope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdConfig {
    /// Primal step size as a fraction of the threshold range.
    pub eta: f64,
    /// Dual step size.
    pub mu: f64,
    /// Perturbation size as a fraction of the threshold range.
    pub sigma_scale: f64,
}

impl Default for PdConfig {
    fn default() -> Self {
        Self {
            eta: 0.03,
            mu: 0.1,
            sigma_scale: 0.1,
        }
    }
}

impl PdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config("pd eta must be positive"));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::config("pd mu must be positive"));
        }
        if !(self.sigma_scale > 0.0 && self.sigma_scale.is_finite()) {
            return Err(Error::config("pd sigma_scale must be positive"));
        }
        Ok(())
    }
}

pub struct PdLearner {
    lo: f64,
    hi: f64,
    base: f64,
    lambdas: Vec<f64>,
    sigma_p: f64,
    eta_eff: f64,
    mu: f64,
    rng: ChaCha8Rng,
    last_dir: Option<f64>,
}

impl PdLearner {
    pub fn new(
        lo: f64,
        hi: f64,
        residual_dim: usize,
        cfg: PdConfig,
        scope: &str,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(lo < hi) {
            return Err(Error::config("pd threshold range must satisfy lo < hi"));
        }
        let range = hi - lo;
        Ok(Self {
            lo,
            hi,
            base: lo + range / 2.0,
            lambdas: vec![0.0; residual_dim],
            sigma_p: cfg.sigma_scale * range,
            eta_eff: cfg.eta * range,
            mu: cfg.mu,
            rng: rng_for_scope(scope),
            last_dir: None,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.lo, self.hi)
    }
}

impl Learner for PdLearner {
    fn name(&self) -> &'static str {
        "pd"
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
        let u = self.last_dir.take().expect("update without a proposal");
        assert_eq!(
            obs.residuals.len(),
            self.lambdas.len(),
            "residual dimension changed mid-run"
        );
        let penalty: f64 = self
            .lambdas
            .iter()
            .zip(&obs.residuals)
            .map(|(l, g)| l * g)
            .sum();
        let lagrangian = -obs.reward + penalty;
        let grad = (lagrangian / self.sigma_p) * u;
        self.base = self.clamp(self.base - self.eta_eff * grad);
        for (l, &g) in self.lambdas.iter_mut().zip(&obs.residuals) {
            *l = (*l + self.mu * g).max(0.0);
        }
    }

    fn snapshot(&self) -> Value {
        json!({
            "algo": "pd",
            "base": self.base,
            "lambdas": self.lambdas,
            "sigma_p": self.sigma_p,
            "eta_eff": self.eta_eff,
            "mu": self.mu,
        })
    }
}
