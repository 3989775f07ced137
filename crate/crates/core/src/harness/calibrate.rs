//! Offline parameter selection: environment calibration and primal-dual
//! step tuning. Both run sweeps against candidate configurations and pick by
//! explicit, recorded rules; the committed presets hold the winners.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{oracle_sweep, pd_tuning_select, PdCandidate, SweepConfig, TradeoffCurve};
use crate::error::{Error, Result};
use crate::learner::{AlgorithmKind, PdConfig};

use super::config::{EnvParams, ExperimentConfig};
use super::runner::{build_env, resolve, run_cells};

/// One environment candidate: feedback strength, plus an optional label
/// model slope for the synthetic task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCandidate {
    pub kappa: f64,
    pub label_weight: Option<f64>,
}

/// What the oracle sweep said about one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: CalibrationCandidate,
    /// Longest contiguous run of feasible grid points.
    pub feasible_width: usize,
    /// Whether the reward-maximizing grid point (ignoring constraints) is
    /// itself feasible. Calibration wants this false: constraints must bind.
    pub unconstrained_optimum_feasible: bool,
    pub accepted: bool,
}

/// Full calibration record, suitable for writing next to the chosen preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub label: String,
    pub min_feasible_width: usize,
    pub outcomes: Vec<CandidateOutcome>,
    pub accepted: CandidateOutcome,
}

fn longest_feasible_run(curve: &TradeoffCurve) -> usize {
    let mut best = 0usize;
    let mut run = 0usize;
    for p in &curve.points {
        if p.feasible {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

fn unconstrained_optimum_feasible(curve: &TradeoffCurve) -> bool {
    curve
        .points
        .iter()
        .max_by(|a, b| a.reward.total_cmp(&b.reward))
        .map(|p| p.feasible)
        .unwrap_or(false)
}

fn apply_candidate(base: &ExperimentConfig, cand: &CalibrationCandidate) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    cfg.env.set_kappa(cand.kappa);
    if let Some(w) = cand.label_weight {
        match &mut cfg.env {
            EnvParams::Mves { label_weight, .. } => *label_weight = w,
            EnvParams::Dataset { .. } => {
                return Err(Error::Calibration(
                    "label_weight only applies to the synthetic environment".into(),
                ))
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Sweeps each candidate's environment at fixed thresholds and accepts the
/// first candidate whose curve has (i) a contiguous feasible region of at
/// least `min_feasible_width` grid points and (ii) an infeasible
/// unconstrained optimum. Errors with per-candidate diagnostics when none
/// qualifies.
pub fn calibrate_env(
    base: &ExperimentConfig,
    candidates: &[CalibrationCandidate],
    min_feasible_width: usize,
    sweep: &SweepConfig,
    root: &Path,
) -> Result<CalibrationReport> {
    if candidates.is_empty() {
        return Err(Error::Calibration("no calibration candidates given".into()));
    }
    let mut outcomes = Vec::with_capacity(candidates.len());
    let mut accepted: Option<CandidateOutcome> = None;
    for cand in candidates {
        let cfg = apply_candidate(base, cand)?;
        let resolved = resolve(&cfg, root)?;
        let mut env = build_env(&resolved)?;
        let scope = format!("{}/calibrate/kappa={}", sweep.scope, cand.kappa);
        let curve = oracle_sweep(env.as_mut(), &resolved.grid, &SweepConfig {
            scope,
            ..sweep.clone()
        })?;
        let feasible_width = longest_feasible_run(&curve);
        let unconstrained_feasible = unconstrained_optimum_feasible(&curve);
        let outcome = CandidateOutcome {
            candidate: *cand,
            feasible_width,
            unconstrained_optimum_feasible: unconstrained_feasible,
            accepted: feasible_width >= min_feasible_width && !unconstrained_feasible,
        };
        if outcome.accepted && accepted.is_none() {
            accepted = Some(outcome.clone());
        }
        outcomes.push(outcome);
    }
    match accepted {
        Some(accepted) => Ok(CalibrationReport {
            label: base.label.clone(),
            min_feasible_width,
            outcomes,
            accepted,
        }),
        None => {
            let diag: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    format!(
                        "kappa={} width={} unconstrained_feasible={}",
                        o.candidate.kappa, o.feasible_width, o.unconstrained_optimum_feasible
                    )
                })
                .collect();
            Err(Error::Calibration(format!(
                "no candidate met width >= {min_feasible_width} with binding constraints: [{}]",
                diag.join("; ")
            )))
        }
    }
}

/// PD tuning record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdTuningReport {
    pub label: String,
    pub candidates: Vec<PdCandidate>,
    pub selected_eta: f64,
    pub selected_mu: f64,
}

/// Runs the primal-dual learner alone under every (eta, mu) pair and picks
/// by feasible-max-tail-reward, falling back to min-cumulative-violation.
pub fn tune_pd(
    base: &ExperimentConfig,
    etas: &[f64],
    mus: &[f64],
    root: &Path,
) -> Result<PdTuningReport> {
    if etas.is_empty() || mus.is_empty() {
        return Err(Error::Calibration("pd tuning needs non-empty step lists".into()));
    }
    let mut candidates = Vec::with_capacity(etas.len() * mus.len());
    for &eta in etas {
        for &mu in mus {
            let mut cfg = base.clone();
            cfg.algorithms = vec![AlgorithmKind::Pd];
            cfg.pd = PdConfig {
                eta,
                mu,
                sigma_scale: base.pd.sigma_scale,
            };
            cfg.validate()?;
            let resolved = resolve(&cfg, root)?;
            let summary = run_cells(&resolved, |_| Ok(()))?;
            candidates.push(PdCandidate {
                eta,
                mu,
                summary: summary.algorithms[0].to_algo_summary(),
            });
        }
    }
    let (selected_eta, selected_mu) = pd_tuning_select(&candidates, &base.constraints)?;
    Ok(PdTuningReport {
        label: base.label.clone(),
        candidates,
        selected_eta,
        selected_mu,
    })
}
