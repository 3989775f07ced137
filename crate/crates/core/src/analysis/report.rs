//! Serialized outputs: summary tables, CI tables, win-rate JSON, and
//! tradeoff-curve CSVs. All writers are deterministic so reruns produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::bootstrap::BootstrapCi;
use crate::analysis::select::WinRateTable;
use crate::analysis::sweep::TradeoffCurve;
use crate::error::Result;

/// One row of the main results table: cross-seed mean and std per metric for
/// one algorithm on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub task: String,
    pub algorithm: String,
    pub reward_mean: f64,
    pub reward_std: Option<f64>,
    pub dp_mean: f64,
    pub dp_std: Option<f64>,
    pub violation_mean: f64,
    pub violation_std: Option<f64>,
    pub acc_mean: f64,
    pub acc_std: Option<f64>,
}

pub const SUMMARY_CSV_HEADER: &str =
    "task,algorithm,reward_mean,reward_std,dp_mean,dp_std,violation_mean,violation_std,acc_mean,acc_std";

/// One row of a paired-comparison table: CI for `metric(a) - metric(b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRow {
    pub task: String,
    pub metric: String,
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub ci: BootstrapCi,
}

pub const CI_CSV_HEADER: &str = "task,metric,algorithm_a,algorithm_b,point,lo,hi,level";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.task,
            r.algorithm,
            r.reward_mean,
            fmt_opt(r.reward_std),
            r.dp_mean,
            fmt_opt(r.dp_std),
            r.violation_mean,
            fmt_opt(r.violation_std),
            r.acc_mean,
            fmt_opt(r.acc_std),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_summary_json(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_ci_csv(path: &Path, rows: &[CiRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CI_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.task, r.metric, r.algorithm_a, r.algorithm_b, r.ci.point, r.ci.lo, r.ci.hi, r.ci.level,
        );
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_ci_json(path: &Path, rows: &[CiRow]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub const CURVE_CSV_HEADER: &str =
    "theta,reward,reward_se,dp_gap,dp_se,acc,acc_se,feasible,oracle";

/// Writes a tradeoff curve as CSV for external plotting. The `oracle` column
/// marks the best feasible row with 1.
pub fn write_curve_csv(path: &Path, curve: &TradeoffCurve) -> Result<()> {
    let oracle_idx = curve.oracle_index();
    let mut out = String::new();
    out.push_str(CURVE_CSV_HEADER);
    out.push('\n');
    for (i, p) in curve.points.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.theta,
            p.reward,
            fmt_opt(p.reward_se),
            p.dp_gap,
            fmt_opt(p.dp_se),
            p.accept_rate,
            fmt_opt(p.acc_se),
            u8::from(p.feasible),
            u8::from(oracle_idx == Some(i)),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes `stress_winrate_<task>.json` under `dir` and returns the path.
pub fn write_winrate_json(dir: &Path, table: &WinRateTable) -> Result<PathBuf> {
    let path = dir.join(format!("stress_winrate_{}.json", table.task));
    let mut text = serde_json::to_string_pretty(table)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::select::WinRate;
    use crate::analysis::sweep::CurvePoint;
    use crate::policy::ConstraintSpec;
    use tempfile::tempdir;

    fn sample_rows() -> Vec<SummaryRow> {
        vec![
            SummaryRow {
                task: "demo".into(),
                algorithm: "ofs".into(),
                reward_mean: 0.31,
                reward_std: Some(0.01),
                dp_mean: 0.005,
                dp_std: Some(0.001),
                violation_mean: 12.0,
                violation_std: Some(2.0),
                acc_mean: 0.97,
                acc_std: Some(0.002),
            },
            SummaryRow {
                task: "demo".into(),
                algorithm: "pd".into(),
                reward_mean: 0.28,
                reward_std: None,
                dp_mean: 0.08,
                dp_std: None,
                violation_mean: 80.0,
                violation_std: None,
                acc_mean: 0.99,
                acc_std: None,
            },
        ]
    }

    #[test]
    fn summary_csv_layout() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        write_summary_csv(&path, &sample_rows()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SUMMARY_CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "demo,ofs,0.31,0.01,0.005,0.001,12,2,0.97,0.002"
        );
        // Missing stds become empty cells.
        assert_eq!(lines.next().unwrap(), "demo,pd,0.28,,0.08,,80,,0.99,");
    }

    #[test]
    fn summary_json_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("summary.json");
        let rows = sample_rows();
        write_summary_json(&path, &rows).unwrap();
        let back: Vec<SummaryRow> =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn ci_tables_write_both_formats() {
        let dir = tempdir().unwrap();
        let rows = vec![CiRow {
            task: "demo".into(),
            metric: "tail_reward".into(),
            algorithm_a: "ofs".into(),
            algorithm_b: "pd".into(),
            ci: BootstrapCi {
                point: 0.03,
                lo: 0.01,
                hi: 0.05,
                level: 0.95,
            },
        }];
        let csv_path = dir.path().join("ci.csv");
        write_ci_csv(&csv_path, &rows).unwrap();
        let text = fs::read_to_string(&csv_path).unwrap();
        assert_eq!(
            text,
            format!("{CI_CSV_HEADER}\ndemo,tail_reward,ofs,pd,0.03,0.01,0.05,0.95\n")
        );
        let json_path = dir.path().join("ci.json");
        write_ci_json(&json_path, &rows).unwrap();
        let back: Vec<CiRow> =
            serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn curve_csv_marks_the_oracle_row() {
        let constraints = ConstraintSpec::dp_only(0.05).unwrap();
        let point = |theta: f64, reward: f64, dp: f64| CurvePoint {
            theta,
            reward,
            reward_se: Some(0.01),
            dp_gap: dp,
            dp_se: Some(0.002),
            accept_rate: 0.9,
            acc_se: None,
            feasible: constraints.satisfied_by(dp, 0.9),
        };
        let points = vec![point(-1.0, 0.1, 0.01), point(0.0, 0.3, 0.02), point(1.0, 0.5, 0.2)];
        let curve = TradeoffCurve {
            constraints,
            oracle: Some(points[1].clone()),
            points,
        };
        curve.check_consistency().unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        write_curve_csv(&path, &curve).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CURVE_CSV_HEADER);
        assert!(lines[1].ends_with(",1,0"));
        assert!(lines[2].ends_with(",1,1"));
        assert!(lines[3].ends_with(",0,0"));
        assert_eq!(lines[2], "0,0.3,0.01,0.02,0.002,0.9,,1,1");
    }

    #[test]
    fn winrate_file_is_named_after_the_task() {
        let dir = tempdir().unwrap();
        let table = WinRateTable {
            task: "mves".into(),
            settings: 9,
            rates: vec![
                WinRate {
                    algorithm: "ofs".into(),
                    wins: 8,
                    percent: 800.0 / 9.0,
                },
                WinRate {
                    algorithm: "pd".into(),
                    wins: 1,
                    percent: 100.0 / 9.0,
                },
            ],
        };
        let path = write_winrate_json(dir.path(), &table).unwrap();
        assert!(path.ends_with("stress_winrate_mves.json"));
        let back: WinRateTable =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, table);
    }
}
