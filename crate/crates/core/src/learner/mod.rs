//! Online learners: propose a threshold, observe one round, update.
//!
//! All three algorithms sit behind [`Learner`]. The unconstrained baseline
//! is contractually limited to the reward field of the observation; the
//! primal-dual baseline additionally reads residuals; the feasible-search
//! learner keeps per-arm statistics over a fixed grid.

pub mod ofs;
pub mod pd;
pub mod zo;

use serde_json::Value;

use crate::policy::Observation;

pub use ofs::{ofs_propose, ofs_radius, ArmStats, OfsConfig, OfsLearner};
pub use pd::{PdConfig, PdLearner};
pub use zo::{ZoConfig, ZoLearner};

pub trait Learner: Send {
    /// Short stable identifier used in run directories and summaries.
    fn name(&self) -> &'static str;

    /// Pick the threshold for round `t` (1-based). Must strictly alternate
    /// with `update`; deterministic given the seed and history.
    fn propose(&mut self, t: u64) -> f64;

    /// Digest the observation produced by playing `theta`.
    fn update(&mut self, theta: f64, obs: &Observation);

    /// Diagnostic state for run-directory snapshots.
    fn snapshot(&self) -> Value;
}

/// The three algorithm families the harness knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Ofs,
    Pd,
    Unconstrained,
}

impl AlgorithmKind {
    pub fn id(self) -> &'static str {
        match self {
            AlgorithmKind::Ofs => "ofs",
            AlgorithmKind::Pd => "pd",
            AlgorithmKind::Unconstrained => "unconstrained",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ofs" => Some(AlgorithmKind::Ofs),
            "pd" => Some(AlgorithmKind::Pd),
            "unconstrained" => Some(AlgorithmKind::Unconstrained),
            _ => None,
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}
