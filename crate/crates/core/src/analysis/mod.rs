//! Evaluation layer: run logs, tail metrics, cumulative violation, seed
//! aggregation, bootstrap CIs, fixed-threshold sweeps, and the winner rules
//! used for tuning and stress reporting.

pub mod bootstrap;
pub mod metrics;
pub mod report;
pub mod runlog;
pub mod select;
pub mod sweep;

pub use bootstrap::{paired_bootstrap_ci, BootstrapCi, DEFAULT_RESAMPLES};
pub use metrics::{aggregate_seeds, cumulative_violation, tail_mean, tail_mode};
pub use report::{
    write_ci_csv, write_ci_json, write_curve_csv, write_summary_csv, write_summary_json,
    write_winrate_json, CiRow, SummaryRow,
};
pub use runlog::{RunHeader, RunLog, RunRecord, RUN_LOG_HEADER};
pub use select::{
    pd_tuning_select, pick_winner, stress_winrate, AlgoSummary, PdCandidate, StressSetting,
    WinRate, WinRateTable,
};
pub use sweep::{oracle_sweep, steady_state_point, CurvePoint, SweepConfig, TradeoffCurve};
