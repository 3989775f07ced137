//! Winner selection rules shared by the stress sweep and PD tuning:
//! feasible-max-tail-reward, falling back to min-cumulative-violation when
//! nothing is feasible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::ConstraintSpec;

/// Cross-seed tail summary of one algorithm on one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algorithm: String,
    pub tail_reward: f64,
    pub tail_dp_gap: f64,
    pub tail_accept_rate: f64,
    pub cumulative_violation: f64,
}

impl AlgoSummary {
    pub fn feasible(&self, constraints: &ConstraintSpec) -> bool {
        constraints.satisfied_by(self.tail_dp_gap, self.tail_accept_rate)
    }
}

/// Index of the winning summary: the feasible entry with the highest tail
/// reward, or, if no entry is feasible, the one with the smallest cumulative
/// violation. Ties go to the earliest index.
pub fn pick_winner(summaries: &[AlgoSummary], constraints: &ConstraintSpec) -> Result<usize> {
    if summaries.is_empty() {
        return Err(Error::Analysis("winner selection over empty field".into()));
    }
    let mut best: Option<usize> = None;
    for (i, s) in summaries.iter().enumerate() {
        if s.feasible(constraints)
            && best.is_none_or(|b| s.tail_reward > summaries[b].tail_reward)
        {
            best = Some(i);
        }
    }
    if let Some(i) = best {
        return Ok(i);
    }
    let mut best = 0;
    for (i, s) in summaries.iter().enumerate().skip(1) {
        if s.cumulative_violation < summaries[best].cumulative_violation {
            best = i;
        }
    }
    Ok(best)
}

/// One tuning candidate: a primal/dual step pair and the tail summary its
/// runs produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdCandidate {
    pub eta: f64,
    pub mu: f64,
    pub summary: AlgoSummary,
}

/// Selects the step pair by the winner rule over tuning candidates.
pub fn pd_tuning_select(
    candidates: &[PdCandidate],
    constraints: &ConstraintSpec,
) -> Result<(f64, f64)> {
    let summaries: Vec<AlgoSummary> = candidates.iter().map(|c| c.summary.clone()).collect();
    let idx = pick_winner(&summaries, constraints)?;
    Ok((candidates[idx].eta, candidates[idx].mu))
}

/// One stress setting: its constraint spec and every algorithm's summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressSetting {
    /// Human-readable identifier, e.g. "eps_x0.50/kappa_x1.50".
    pub setting: String,
    pub constraints: ConstraintSpec,
    pub summaries: Vec<AlgoSummary>,
}

/// Per-algorithm win share over stress settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRate {
    pub algorithm: String,
    pub wins: usize,
    pub percent: f64,
}

/// Aggregated stress outcome for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateTable {
    pub task: String,
    pub settings: usize,
    pub rates: Vec<WinRate>,
}

/// Applies the winner rule to every setting and reports the percentage of
/// settings won per algorithm. Every setting must cover the same algorithms
/// in the same order; percentages sum to 100 up to rounding.
pub fn stress_winrate(task: &str, settings: &[StressSetting]) -> Result<WinRateTable> {
    let first = settings
        .first()
        .ok_or_else(|| Error::Analysis("stress win rate over zero settings".into()))?;
    let algos: Vec<String> = first
        .summaries
        .iter()
        .map(|s| s.algorithm.clone())
        .collect();
    if algos.is_empty() {
        return Err(Error::Analysis("stress setting lists no algorithms".into()));
    }
    let mut wins = vec![0usize; algos.len()];
    for setting in settings {
        let here: Vec<&str> = setting
            .summaries
            .iter()
            .map(|s| s.algorithm.as_str())
            .collect();
        if here != algos.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Analysis(format!(
                "setting {:?} covers algorithms {:?}, expected {:?}",
                setting.setting, here, algos
            )));
        }
        let winner = pick_winner(&setting.summaries, &setting.constraints)?;
        wins[winner] += 1;
    }
    let total = settings.len();
    let rates = algos
        .into_iter()
        .zip(&wins)
        .map(|(algorithm, &w)| WinRate {
            algorithm,
            wins: w,
            percent: 100.0 * w as f64 / total as f64,
        })
        .collect();
    Ok(WinRateTable {
        task: task.into(),
        settings: total,
        rates,
    })
}
