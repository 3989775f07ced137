//! Orchestration: builds environments and learners from a config, runs every
//! (algorithm, seed) cell, and lays out the run directory.
//!
//! Cells are fully independent: the environment stream is keyed by the seed
//! alone (so algorithms compare on common random numbers) and each learner
//! stream is keyed by (label, algorithm, seed). Adding or removing an
//! algorithm therefore never perturbs another algorithm's trajectories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    aggregate_seeds, cumulative_violation, oracle_sweep, steady_state_point, tail_mean, tail_mode,
    write_curve_csv, write_summary_csv, AlgoSummary, RunHeader, RunLog, RunRecord, SummaryRow,
    SweepConfig, TradeoffCurve,
};
use crate::data::{load_env_pack, sha256_hex, EnvPack};
use crate::env::{Environment, MvesConfig, MvesEnv, SemiSynConfig, SemiSynEnv};
use crate::error::{Error, Result};
use crate::learner::{AlgorithmKind, Learner, OfsLearner, PdLearner, ZoLearner};
use crate::policy::ThresholdGrid;
use crate::seeding::{cell_scope, RNG_IDENTITY};

use super::config::{EnvParams, ExperimentConfig, TaskKind};

/// A config with every deferred value filled in: concrete grid bounds and,
/// for dataset tasks, the loaded pack.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub grid: ThresholdGrid,
    pub grid_source: String,
    pub pack: Option<EnvPack>,
}

/// Loads the pack (if any) and pins the grid. The returned config is fully
/// concrete: re-running it reproduces the run without consulting the pack
/// for bounds again.
pub fn resolve(cfg: &ExperimentConfig, root: &Path) -> Result<Resolved> {
    cfg.validate()?;
    let mut config = cfg.clone();
    let pack = match &cfg.env {
        EnvParams::Dataset { pack_path, .. } => {
            let path = root.join(pack_path);
            let pack = load_env_pack(&path)?;
            let expected = match cfg.task {
                TaskKind::German => "german",
                TaskKind::Compas => "compas",
                TaskKind::Mves => unreachable!("validated task/env pairing"),
            };
            if pack.dataset != expected {
                return Err(Error::Run(format!(
                    "config for task {} points at a pack built from {:?}",
                    cfg.task, pack.dataset
                )));
            }
            Some(pack)
        }
        EnvParams::Mves { .. } => None,
    };

    let grid_source;
    if config.grid.from_pack {
        let pack = pack.as_ref().expect("validated: from_pack implies dataset");
        let margin = 0.10 * (pack.score_max - pack.score_min);
        config.grid.theta_min = pack.score_min - margin;
        config.grid.theta_max = pack.score_max + margin;
        config.grid.from_pack = false;
        grid_source = "pack score range with 10% margin".to_string();
    } else {
        grid_source = "config".to_string();
    }
    if let (EnvParams::Dataset { group_prob, .. }, Some(pack)) = (&mut config.env, &pack) {
        if group_prob.is_none() {
            *group_prob = Some(pack.group_one_fraction);
        }
    }
    config.validate()?;
    let grid = ThresholdGrid::uniform(
        config.grid.theta_min,
        config.grid.theta_max,
        config.grid.k_theta,
    )?;
    Ok(Resolved {
        config,
        grid,
        grid_source,
        pack,
    })
}

/// Builds the environment described by a resolved config. The constructor
/// seed is a placeholder; every cell resets with its own seed before use.
pub fn build_env(resolved: &Resolved) -> Result<Box<dyn Environment>> {
    let cfg = &resolved.config;
    match &cfg.env {
        EnvParams::Mves {
            base_means,
            sigma,
            rho,
            kappa,
            group_prob,
            label_weight,
            label_bias,
            c_fp,
        } => {
            let env_cfg = MvesConfig {
                base_means: *base_means,
                sigma: *sigma,
                rho: *rho,
                kappa: *kappa,
                group_prob: *group_prob,
                label_weight: *label_weight,
                label_bias: *label_bias,
                batch_size: cfg.batch_size,
                c_fp: *c_fp,
                constraints: cfg.constraints,
            };
            Ok(Box::new(MvesEnv::new(env_cfg, 0)?))
        }
        EnvParams::Dataset {
            rho,
            kappa,
            w_init,
            w_lo,
            w_hi,
            acc_ref,
            group_prob,
            c_fp,
            ..
        } => {
            let pack = resolved
                .pack
                .as_ref()
                .ok_or_else(|| Error::Run("dataset env without a loaded pack".into()))?;
            let env_cfg = SemiSynConfig {
                rho: *rho,
                kappa: *kappa,
                w_init: *w_init,
                w_lo: *w_lo,
                w_hi: *w_hi,
                acc_ref: *acc_ref,
                group_prob: group_prob.unwrap_or(pack.group_one_fraction),
                batch_size: cfg.batch_size,
                c_fp: *c_fp,
                constraints: cfg.constraints,
            };
            Ok(Box::new(SemiSynEnv::new(pack.pools.pools.clone(), env_cfg, 0)?))
        }
    }
}

/// Builds the learner for one cell, seeded by its scope string.
pub fn build_learner(
    cfg: &ExperimentConfig,
    grid: &ThresholdGrid,
    algo: AlgorithmKind,
    scope: &str,
) -> Result<Box<dyn Learner>> {
    let dim = cfg.constraints.residual_dim();
    Ok(match algo {
        AlgorithmKind::Ofs => Box::new(OfsLearner::new(grid.clone(), dim, cfg.ofs, scope)?),
        AlgorithmKind::Pd => Box::new(PdLearner::new(
            grid.theta_min(),
            grid.theta_max(),
            dim,
            cfg.pd,
            scope,
        )?),
        AlgorithmKind::Unconstrained => Box::new(ZoLearner::new(
            grid.theta_min(),
            grid.theta_max(),
            cfg.unconstrained,
            scope,
        )?),
    })
}

/// One completed cell: its log and the learner's final state.
pub struct CellOutput {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub log: RunLog,
    pub snapshot: Value,
}

/// Runs one (algorithm, seed) cell against a freshly reset environment.
pub fn execute_cell(
    resolved: &Resolved,
    env: &mut dyn Environment,
    algo: AlgorithmKind,
    seed: u64,
) -> Result<CellOutput> {
    let cfg = &resolved.config;
    let scope = cell_scope("learner", &cfg.label, algo.id(), seed);
    let mut learner = build_learner(cfg, &resolved.grid, algo, &scope)?;
    env.reset(seed);
    let mut records = Vec::with_capacity(cfg.horizon);
    for t in 1..=cfg.horizon {
        let theta = learner.propose(t as u64);
        let obs = env.step(theta);
        learner.update(theta, &obs);
        records.push(RunRecord::from_observation(t, theta, &obs, &cfg.constraints));
    }
    let log = RunLog {
        header: RunHeader {
            task: cfg.label.clone(),
            algorithm: algo.id().into(),
            seed,
            constraints: cfg.constraints,
            env_config_hash: config_hash(cfg)?,
            horizon: cfg.horizon,
        },
        records,
    };
    log.validate()?;
    Ok(CellOutput {
        algorithm: algo,
        seed,
        log,
        snapshot: learner.snapshot(),
    })
}

/// Hash identifying the resolved config a log belongs to.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    Ok(sha256_hex(cfg.to_toml()?.as_bytes()))
}

/// Per-seed scalar metrics extracted from one cell's log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub tail_reward: f64,
    pub tail_dp_gap: f64,
    pub tail_accept_rate: f64,
    pub violation: f64,
    /// The threshold this run settled on: the most-played threshold over the
    /// tail window for arm-based learners, the tail-mean threshold for
    /// continuous search (whose symmetric probe offsets cancel in the mean).
    pub converged_theta: f64,
}

pub fn seed_metrics(log: &RunLog, k_tail: usize) -> Result<SeedMetrics> {
    let rewards = log.rewards();
    let dp_gaps = log.dp_gaps();
    let accs: Vec<f64> = log.records.iter().map(|r| r.acc).collect();
    let thetas = log.thetas();
    let (violation, _) = cumulative_violation(&log.residual_series());
    let converged_theta = match log.header.algorithm.as_str() {
        "ofs" => tail_mode(&thetas, k_tail)?,
        _ => tail_mean(&thetas, k_tail)?,
    };
    Ok(SeedMetrics {
        seed: log.header.seed,
        tail_reward: tail_mean(&rewards, k_tail)?,
        tail_dp_gap: tail_mean(&dp_gaps, k_tail)?,
        tail_accept_rate: tail_mean(&accs, k_tail)?,
        violation,
        converged_theta,
    })
}

/// Cross-seed report for one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoReport {
    pub algorithm: String,
    pub per_seed: Vec<SeedMetrics>,
    pub tail_reward_mean: f64,
    pub tail_reward_std: Option<f64>,
    pub tail_dp_gap_mean: f64,
    pub tail_dp_gap_std: Option<f64>,
    pub tail_accept_rate_mean: f64,
    pub tail_accept_rate_std: Option<f64>,
    pub violation_mean: f64,
    pub violation_std: Option<f64>,
}

impl AlgoReport {
    pub fn from_seeds(algorithm: &str, per_seed: Vec<SeedMetrics>) -> Result<Self> {
        let col = |f: fn(&SeedMetrics) -> f64| -> Vec<f64> { per_seed.iter().map(f).collect() };
        let (tail_reward_mean, tail_reward_std) = aggregate_seeds(&col(|m| m.tail_reward))?;
        let (tail_dp_gap_mean, tail_dp_gap_std) = aggregate_seeds(&col(|m| m.tail_dp_gap))?;
        let (tail_accept_rate_mean, tail_accept_rate_std) =
            aggregate_seeds(&col(|m| m.tail_accept_rate))?;
        let (violation_mean, violation_std) = aggregate_seeds(&col(|m| m.violation))?;
        Ok(AlgoReport {
            algorithm: algorithm.into(),
            per_seed,
            tail_reward_mean,
            tail_reward_std,
            tail_dp_gap_mean,
            tail_dp_gap_std,
            tail_accept_rate_mean,
            tail_accept_rate_std,
            violation_mean,
            violation_std,
        })
    }

    /// Collapses the report into the form the winner rules consume.
    pub fn to_algo_summary(&self) -> AlgoSummary {
        AlgoSummary {
            algorithm: self.algorithm.clone(),
            tail_reward: self.tail_reward_mean,
            tail_dp_gap: self.tail_dp_gap_mean,
            tail_accept_rate: self.tail_accept_rate_mean,
            cumulative_violation: self.violation_mean,
        }
    }

    pub fn per_seed_values(&self, f: fn(&SeedMetrics) -> f64) -> Vec<f64> {
        self.per_seed.iter().map(f).collect()
    }
}

/// The whole experiment's summary, as written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub task: TaskKind,
    pub horizon: usize,
    pub k_tail: usize,
    pub constraints: crate::policy::ConstraintSpec,
    pub algorithms: Vec<AlgoReport>,
}

impl RunSummary {
    pub fn algo(&self, id: &str) -> Option<&AlgoReport> {
        self.algorithms.iter().find(|a| a.algorithm == id)
    }

    pub fn to_rows(&self) -> Vec<SummaryRow> {
        self.algorithms
            .iter()
            .map(|a| SummaryRow {
                task: self.label.clone(),
                algorithm: a.algorithm.clone(),
                reward_mean: a.tail_reward_mean,
                reward_std: a.tail_reward_std,
                dp_mean: a.tail_dp_gap_mean,
                dp_std: a.tail_dp_gap_std,
                violation_mean: a.violation_mean,
                violation_std: a.violation_std,
                acc_mean: a.tail_accept_rate_mean,
                acc_std: a.tail_accept_rate_std,
            })
            .collect()
    }
}

/// Runs every cell of a resolved config in memory and summarizes. The
/// callback sees each finished cell (used by `run_experiment` to persist
/// logs; stress and tuning pass a no-op).
pub fn run_cells<F>(resolved: &Resolved, mut on_cell: F) -> Result<RunSummary>
where
    F: FnMut(&CellOutput) -> Result<()>,
{
    let cfg = &resolved.config;
    let mut env = build_env(resolved)?;
    let mut reports = Vec::with_capacity(cfg.algorithms.len());
    for &algo in &cfg.algorithms {
        let mut per_seed = Vec::with_capacity(cfg.seeds.len());
        for &seed in &cfg.seeds {
            let cell = execute_cell(resolved, env.as_mut(), algo, seed)?;
            per_seed.push(seed_metrics(&cell.log, cfg.k_tail)?);
            on_cell(&cell)?;
        }
        reports.push(AlgoReport::from_seeds(algo.id(), per_seed)?);
    }
    Ok(RunSummary {
        label: cfg.label.clone(),
        task: cfg.task,
        horizon: cfg.horizon,
        k_tail: cfg.k_tail,
        constraints: cfg.constraints,
        algorithms: reports,
    })
}

/// A finished run on disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

/// Runs the experiment and writes the run directory:
///
/// ```text
/// <out_dir>/config.toml        resolved config (re-runnable)
/// <out_dir>/provenance.json    RNG identity, grid origin, pack hash
/// <out_dir>/logs/<algo>/seed_<k>.csv
/// <out_dir>/snapshots/<algo>/seed_<k>.json
/// <out_dir>/summary.json, summary.csv
/// ```
///
/// All contents are deterministic functions of the config, so re-running
/// produces byte-identical files.
pub fn run_experiment(cfg: &ExperimentConfig, root: &Path) -> Result<RunOutcome> {
    let resolved = resolve(cfg, root)?;
    let out = root.join(&resolved.config.out_dir);
    fs::create_dir_all(&out)?;
    resolved.config.write_toml(&out.join("config.toml"))?;
    write_provenance(&resolved, &out)?;
    for &algo in &resolved.config.algorithms {
        fs::create_dir_all(out.join("logs").join(algo.id()))?;
        fs::create_dir_all(out.join("snapshots").join(algo.id()))?;
    }
    let summary = run_cells(&resolved, |cell| {
        let algo_dir = out.join("logs").join(cell.algorithm.id());
        cell.log
            .write_csv(&algo_dir.join(format!("seed_{}.csv", cell.seed)))?;
        let snap_path = out
            .join("snapshots")
            .join(cell.algorithm.id())
            .join(format!("seed_{}.json", cell.seed));
        let mut text = serde_json::to_string_pretty(&cell.snapshot)?;
        text.push('\n');
        fs::write(snap_path, text)?;
        Ok(())
    })?;
    write_summary(&summary, &out)?;
    Ok(RunOutcome { dir: out, summary })
}

fn write_provenance(resolved: &Resolved, out: &Path) -> Result<()> {
    let cfg = &resolved.config;
    let pack = resolved.pack.as_ref().map(|p| {
        json!({
            "path": match &cfg.env {
                EnvParams::Dataset { pack_path, .. } => pack_path.clone(),
                EnvParams::Mves { .. } => String::new(),
            },
            "dataset": p.dataset,
            "csv_sha256": p.csv_sha256,
            "rows": p.rows,
        })
    });
    let doc = json!({
        "label": cfg.label,
        "rng": RNG_IDENTITY,
        "code_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_hash(cfg)?,
        "grid": {
            "theta_min": cfg.grid.theta_min,
            "theta_max": cfg.grid.theta_max,
            "k_theta": cfg.grid.k_theta,
            "source": resolved.grid_source,
        },
        "pack": pack,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(out.join("provenance.json"), text)?;
    Ok(())
}

fn write_summary(summary: &RunSummary, out: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(out.join("summary.json"), text)?;
    write_summary_csv(&out.join("summary.csv"), &summary.to_rows())?;
    Ok(())
}

/// Reads a run directory's summary back.
pub fn load_summary(dir: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(dir.join("summary.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs the fixed-threshold sweep for a config and writes the curve next to
/// the run outputs as `curve.csv` and `curve.json`.
pub fn run_oracle(
    cfg: &ExperimentConfig,
    root: &Path,
    sweep: &SweepConfig,
) -> Result<(TradeoffCurve, PathBuf)> {
    let resolved = resolve(cfg, root)?;
    let mut env = build_env(&resolved)?;
    let curve = oracle_sweep(env.as_mut(), &resolved.grid, sweep)?;
    curve.check_consistency()?;
    let out = root.join(&resolved.config.out_dir);
    fs::create_dir_all(&out)?;
    write_curve_csv(&out.join("curve.csv"), &curve)?;
    let mut text = serde_json::to_string_pretty(&curve)?;
    text.push('\n');
    fs::write(out.join("curve.json"), text)?;
    Ok((curve, out))
}

/// One algorithm's converged thresholds scored at fixed-threshold steady
/// state, with the suboptimality gap against the sweep oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub algorithm: String,
    /// Converged threshold per seed, in seed order.
    pub converged_thetas: Vec<f64>,
    /// Seed-weighted steady-state estimates of those thresholds.
    pub steady_reward: f64,
    pub steady_dp_gap: f64,
    pub steady_accept_rate: f64,
    /// Oracle steady reward minus `steady_reward`.
    pub gap: f64,
}

/// Scores each named algorithm's converged thresholds under the sweep
/// protocol and gaps them against the oracle point.
///
/// Per-seed thresholds are deduplicated exactly before evaluation (arm-based
/// learners usually converge to the same grid point on every seed) and the
/// estimates are weighted by how many seeds share each threshold. Evaluation
/// seeds derive from the sweep scope, the algorithm id, and the threshold's
/// bit pattern, so the scoring is deterministic and independent of seed
/// order.
pub fn steady_state_gaps(
    resolved: &Resolved,
    summary: &RunSummary,
    curve: &TradeoffCurve,
    algorithms: &[&str],
    sweep: &SweepConfig,
) -> Result<Vec<GapRow>> {
    let oracle = curve
        .oracle
        .as_ref()
        .ok_or_else(|| Error::Run("cannot gap against a sweep with no feasible point".into()))?;
    let mut env = build_env(resolved)?;
    let mut rows = Vec::with_capacity(algorithms.len());
    for &algo in algorithms {
        let report = summary
            .algo(algo)
            .ok_or_else(|| Error::Run(format!("no algorithm {algo:?} in the run summary")))?;
        let converged_thetas: Vec<f64> =
            report.per_seed.iter().map(|m| m.converged_theta).collect();
        let mut groups: std::collections::BTreeMap<u64, usize> = Default::default();
        for &theta in &converged_thetas {
            *groups.entry(theta.to_bits()).or_insert(0) += 1;
        }
        let n = converged_thetas.len() as f64;
        let mut weighted = [0.0f64; 3];
        for (&bits, &count) in &groups {
            let theta = f64::from_bits(bits);
            let cfg = SweepConfig {
                scope: format!("{}/{}/theta_bits={:016x}", sweep.scope, algo, bits),
                ..sweep.clone()
            };
            let point = steady_state_point(env.as_mut(), theta, &cfg)?;
            let w = count as f64 / n;
            weighted[0] += w * point.reward;
            weighted[1] += w * point.dp_gap;
            weighted[2] += w * point.accept_rate;
        }
        rows.push(GapRow {
            algorithm: algo.into(),
            converged_thetas,
            steady_reward: weighted[0],
            steady_dp_gap: weighted[1],
            steady_accept_rate: weighted[2],
            gap: oracle.reward - weighted[0],
        });
    }
    Ok(rows)
}
