//! Per-run time series: one record per round, CSV persistence.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{ConstraintSpec, Observation};

/// Pinned CSV header for run logs. Downstream plotting scripts key on these
/// column names, so the order is part of the file format.
pub const RUN_LOG_HEADER: &str = "t,theta,reward,g_dp,g_srv_lo,g_srv_hi,dp_gap,acc,acc0,acc1";

/// One round of a run: the proposed threshold and everything observed for it.
///
/// Service residuals and per-group rates are optional; they are empty cells in
/// the CSV when the service constraint is disabled or a group went unsampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub t: usize,
    pub theta: f64,
    pub reward: f64,
    pub g_dp: f64,
    pub g_srv_lo: Option<f64>,
    pub g_srv_hi: Option<f64>,
    pub dp_gap: f64,
    pub acc: f64,
    pub acc0: Option<f64>,
    pub acc1: Option<f64>,
}

impl RunRecord {
    /// Assembles a record from a round's observation.
    pub fn from_observation(t: usize, theta: f64, obs: &Observation, spec: &ConstraintSpec) -> Self {
        let (g_srv_lo, g_srv_hi) = if spec.service_enabled {
            (Some(obs.residuals[1]), Some(obs.residuals[2]))
        } else {
            (None, None)
        };
        RunRecord {
            t,
            theta,
            reward: obs.reward,
            g_dp: obs.residuals[0],
            g_srv_lo,
            g_srv_hi,
            dp_gap: obs.dp_gap,
            acc: obs.accept_rate,
            acc0: obs.accept_rate_by_group[0],
            acc1: obs.accept_rate_by_group[1],
        }
    }

    /// Constraint residuals for this round, in spec order.
    pub fn residuals(&self) -> Vec<f64> {
        let mut out = vec![self.g_dp];
        if let Some(v) = self.g_srv_lo {
            out.push(v);
        }
        if let Some(v) = self.g_srv_hi {
            out.push(v);
        }
        out
    }
}

/// Header metadata identifying which run produced a log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub task: String,
    pub algorithm: String,
    pub seed: u64,
    pub constraints: ConstraintSpec,
    pub env_config_hash: String,
    pub horizon: usize,
}

/// A completed run: header plus exactly `horizon` records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub header: RunHeader,
    pub records: Vec<RunRecord>,
}

impl RunLog {
    /// Checks the structural invariants: record count matches the horizon and
    /// `t` runs 1, 2, ..., T.
    pub fn validate(&self) -> Result<()> {
        if self.records.len() != self.header.horizon {
            return Err(Error::Analysis(format!(
                "run log for {}/{} seed {} has {} records, expected {}",
                self.header.task,
                self.header.algorithm,
                self.header.seed,
                self.records.len(),
                self.header.horizon
            )));
        }
        for (i, rec) in self.records.iter().enumerate() {
            if rec.t != i + 1 {
                return Err(Error::Analysis(format!(
                    "run log record {} has t = {}, expected {}",
                    i,
                    rec.t,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.reward).collect()
    }

    pub fn dp_gaps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.dp_gap).collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.theta).collect()
    }

    pub fn residual_series(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.residuals()).collect()
    }

    /// Writes the log as CSV with the pinned header. `None` fields become
    /// empty cells.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.records.len() * 64);
        out.push_str(RUN_LOG_HEADER);
        out.push('\n');
        for rec in &self.records {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                rec.t,
                fmt_f64(rec.theta),
                fmt_f64(rec.reward),
                fmt_f64(rec.g_dp),
                fmt_opt(rec.g_srv_lo),
                fmt_opt(rec.g_srv_hi),
                fmt_f64(rec.dp_gap),
                fmt_f64(rec.acc),
                fmt_opt(rec.acc0),
                fmt_opt(rec.acc1),
            );
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads records back from a CSV written by [`RunLog::write_csv`].
    ///
    /// The caller supplies the header metadata; the file stores only the time
    /// series. Validates the column header and the `t` sequence.
    pub fn read_csv(path: &Path, header: RunHeader) -> Result<RunLog> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first == RUN_LOG_HEADER => {}
            Some(first) => {
                return Err(Error::Analysis(format!(
                    "unexpected run log header {:?} in {}",
                    first,
                    path.display()
                )))
            }
            None => {
                return Err(Error::Analysis(format!("empty run log {}", path.display())));
            }
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 10 {
                return Err(Error::Analysis(format!(
                    "line {} of {} has {} fields, expected 10",
                    lineno + 2,
                    path.display(),
                    fields.len()
                )));
            }
            let parse = |i: usize| -> Result<f64> {
                fields[i].parse::<f64>().map_err(|_| {
                    Error::Analysis(format!(
                        "line {} of {}: cannot parse field {} ({:?})",
                        lineno + 2,
                        path.display(),
                        i,
                        fields[i]
                    ))
                })
            };
            let parse_opt = |i: usize| -> Result<Option<f64>> {
                if fields[i].is_empty() {
                    Ok(None)
                } else {
                    parse(i).map(Some)
                }
            };
            records.push(RunRecord {
                t: fields[0].parse::<usize>().map_err(|_| {
                    Error::Analysis(format!(
                        "line {} of {}: bad t {:?}",
                        lineno + 2,
                        path.display(),
                        fields[0]
                    ))
                })?,
                theta: parse(1)?,
                reward: parse(2)?,
                g_dp: parse(3)?,
                g_srv_lo: parse_opt(4)?,
                g_srv_hi: parse_opt(5)?,
                dp_gap: parse(6)?,
                acc: parse(7)?,
                acc0: parse_opt(8)?,
                acc1: parse_opt(9)?,
            });
        }
        let log = RunLog { header, records };
        log.validate()?;
        Ok(log)
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip representation; keeps logs byte-stable across runs.
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::ConstraintSpec;
    use tempfile::tempdir;

    fn sample_header(horizon: usize, service: bool) -> RunHeader {
        let constraints = if service {
            ConstraintSpec::with_service(0.02, 0.3, 0.99).unwrap()
        } else {
            ConstraintSpec::dp_only(0.06).unwrap()
        };
        RunHeader {
            task: "demo".into(),
            algorithm: "ofs".into(),
            seed: 3,
            constraints,
            env_config_hash: "cafe".into(),
            horizon,
        }
    }

    fn sample_log(service: bool) -> RunLog {
        let records = (1..=4)
            .map(|t| RunRecord {
                t,
                theta: 0.25 * t as f64,
                reward: 0.1 * t as f64,
                g_dp: -0.01,
                g_srv_lo: service.then_some(-0.6),
                g_srv_hi: service.then_some(0.02),
                dp_gap: 0.01,
                acc: 0.97,
                acc0: Some(0.96),
                acc1: if t == 2 { None } else { Some(0.98) },
            })
            .collect();
        RunLog {
            header: sample_header(4, service),
            records,
        }
    }

    #[test]
    fn validate_accepts_well_formed_log() {
        sample_log(true).validate().unwrap();
    }

    #[test]
    fn validate_rejects_wrong_count() {
        let mut log = sample_log(false);
        log.records.pop();
        let err = log.validate().unwrap_err().to_string();
        assert!(err.contains("3 records, expected 4"), "{err}");
    }

    #[test]
    fn validate_rejects_non_consecutive_t() {
        let mut log = sample_log(false);
        log.records[2].t = 7;
        assert!(log.validate().is_err());
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let dir = tempdir().unwrap();
        for service in [false, true] {
            let log = sample_log(service);
            let path = dir.path().join(format!("run_{service}.csv"));
            log.write_csv(&path).unwrap();
            let back = RunLog::read_csv(&path, log.header.clone()).unwrap();
            assert_eq!(back, log);
        }
    }

    #[test]
    fn csv_header_is_pinned() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.csv");
        sample_log(true).write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,theta,reward,g_dp,g_srv_lo,g_srv_hi,dp_gap,acc,acc0,acc1\n"));
    }

    #[test]
    fn dp_only_log_has_empty_service_cells() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.csv");
        sample_log(false).write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let first = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields[4], "");
        assert_eq!(fields[5], "");
    }

    #[test]
    fn read_rejects_foreign_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        let err = RunLog::read_csv(&path, sample_header(1, false))
            .unwrap_err()
            .to_string();
        assert!(err.contains("unexpected run log header"), "{err}");
    }

    #[test]
    fn from_observation_maps_fields() {
        let spec = ConstraintSpec::with_service(0.02, 0.3, 0.99).unwrap();
        let obs = Observation {
            reward: 0.4,
            residuals: vec![-0.01, -0.5, 0.03],
            dp_gap: 0.01,
            accept_rate: 0.9,
            accept_rate_by_group: [Some(0.89), Some(0.91)],
        };
        let rec = RunRecord::from_observation(5, 1.5, &obs, &spec);
        assert_eq!(rec.t, 5);
        assert_eq!(rec.g_srv_lo, Some(-0.5));
        assert_eq!(rec.g_srv_hi, Some(0.03));
        assert_eq!(rec.residuals(), vec![-0.01, -0.5, 0.03]);

        let spec_dp = ConstraintSpec::dp_only(0.06).unwrap();
        let obs_dp = Observation {
            residuals: vec![-0.01],
            ..obs
        };
        let rec = RunRecord::from_observation(1, 0.0, &obs_dp, &spec_dp);
        assert_eq!(rec.g_srv_lo, None);
        assert_eq!(rec.residuals(), vec![-0.01]);
    }
}
