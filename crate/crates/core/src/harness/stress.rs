//! Robustness sweep: reruns the full algorithm set across a cross-product of
//! cost, fairness-tolerance, and feedback-strength values, then scores each
//! setting with the shared winner rule.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{stress_winrate, StressSetting, WinRateTable};
use crate::error::{Error, Result};

use super::config::{ExperimentConfig, RunMode};
use super::runner::{resolve, run_cells};

/// Value lists swept by the stress protocol. Every combination in the cross
/// product becomes one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressSpec {
    pub c_fp: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub kappa: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl StressSpec {
    /// Default nine-setting sweep around a base config: the DP tolerance at
    /// {0.5, 0.75, 1.0} of its base value crossed with feedback strength at
    /// {0.5, 1.0, 1.5} of its base value, at the base cost. Tolerances only
    /// tighten so every setting stays a test of constraint handling rather
    /// than of how much slack a loose tolerance hands out. Five seeds.
    pub fn default_for(cfg: &ExperimentConfig) -> Self {
        let eps = cfg.constraints.epsilon;
        let kappa = cfg.env.kappa();
        StressSpec {
            c_fp: vec![cfg.env.c_fp()],
            epsilon: vec![0.5 * eps, 0.75 * eps, eps],
            kappa: vec![0.5 * kappa, kappa, 1.5 * kappa],
            seeds: (0..5).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_fp.is_empty() || self.epsilon.is_empty() || self.kappa.is_empty() {
            return Err(Error::Run("stress sweep lists must be non-empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Run("stress sweep needs at least one seed".into()));
        }
        Ok(())
    }

    pub fn num_settings(&self) -> usize {
        self.c_fp.len() * self.epsilon.len() * self.kappa.len()
    }
}

/// A completed stress sweep: the per-setting summaries and the win table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressOutcome {
    pub spec: StressSpec,
    pub settings: Vec<StressSetting>,
    pub table: WinRateTable,
}

/// Runs every setting of the cross product and aggregates win rates.
///
/// Learner and environment streams are keyed exactly as in a plain run (the
/// base label and the seed), so settings are paired and a one-setting sweep
/// at the base values reproduces `run_experiment`'s trajectories verbatim.
pub fn stress_sweep(
    base: &ExperimentConfig,
    spec: &StressSpec,
    root: &Path,
) -> Result<StressOutcome> {
    spec.validate()?;
    let mut settings = Vec::with_capacity(spec.num_settings());
    for &c_fp in &spec.c_fp {
        for &epsilon in &spec.epsilon {
            for &kappa in &spec.kappa {
                let mut cfg = base.clone();
                cfg.mode = RunMode::Stress;
                cfg.seeds = spec.seeds.clone();
                cfg.constraints.epsilon = epsilon;
                cfg.env.set_c_fp(c_fp);
                cfg.env.set_kappa(kappa);
                cfg.validate()?;
                let resolved = resolve(&cfg, root)?;
                let summary = run_cells(&resolved, |_| Ok(()))?;
                settings.push(StressSetting {
                    setting: format!("cfp={c_fp}/eps={epsilon}/kappa={kappa}"),
                    constraints: cfg.constraints,
                    summaries: summary
                        .algorithms
                        .iter()
                        .map(|a| a.to_algo_summary())
                        .collect(),
                });
            }
        }
    }
    let table = stress_winrate(base.task.id(), &settings)?;
    Ok(StressOutcome {
        spec: spec.clone(),
        settings,
        table,
    })
}
