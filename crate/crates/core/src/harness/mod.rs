//! Experiment orchestration: run configs and presets, the cell runner that
//! pairs environments with learners under scoped seeding, on-disk run
//! artifacts, environment calibration, PD step tuning, and the stress sweep.

pub mod calibrate;
pub mod config;
pub mod presets;
pub mod runner;
pub mod stress;

pub use calibrate::{
    calibrate_env, tune_pd, CalibrationCandidate, CalibrationReport, CandidateOutcome,
    PdTuningReport,
};
pub use config::{EnvParams, ExperimentConfig, GridSpec, RunMode, TaskKind};
pub use presets::{preset, PRESET_NAMES};
pub use runner::{
    build_env, build_learner, config_hash, execute_cell, load_summary, resolve, run_cells,
    run_experiment, run_oracle, seed_metrics, steady_state_gaps, AlgoReport, CellOutput, GapRow,
    Resolved, RunOutcome, RunSummary, SeedMetrics,
};
pub use stress::{stress_sweep, StressOutcome, StressSpec};
