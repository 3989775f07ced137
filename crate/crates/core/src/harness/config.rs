//! Experiment configuration: the fully serializable description of a run.
//! A run directory always contains the exact resolved config that produced
//! it, so any run can be reproduced bit-for-bit from its own artifacts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{AlgorithmKind, OfsConfig, PdConfig, ZoConfig};
use crate::policy::ConstraintSpec;

/// Which scoring environment a run targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Mves,
    German,
    Compas,
}

impl TaskKind {
    pub fn id(self) -> &'static str {
        match self {
            TaskKind::Mves => "mves",
            TaskKind::German => "german",
            TaskKind::Compas => "compas",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// What kind of experiment the config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Main,
    Strict,
    Stress,
    Oracle,
    PdTuning,
}

/// Uniform threshold grid description. When `from_pack` is set the bounds
/// are resolved at run time from the environment pack's empirical score
/// range with a 10% margin on both sides; the resolved config records the
/// concrete bounds with `from_pack` cleared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub k_theta: usize,
    #[serde(default)]
    pub from_pack: bool,
}

/// Environment parameters; the variant decides the simulator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnvParams {
    Mves {
        base_means: [f64; 2],
        sigma: f64,
        rho: f64,
        kappa: f64,
        group_prob: f64,
        label_weight: f64,
        label_bias: f64,
        c_fp: f64,
    },
    Dataset {
        /// Path to the env pack JSON, relative to the workspace root.
        pack_path: String,
        rho: f64,
        kappa: f64,
        w_init: f64,
        w_lo: f64,
        w_hi: f64,
        acc_ref: f64,
        /// Group-one arrival probability; defaults to the dataset's
        /// empirical fraction recorded in the pack.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group_prob: Option<f64>,
        c_fp: f64,
    },
}

impl EnvParams {
    pub fn c_fp(&self) -> f64 {
        match self {
            EnvParams::Mves { c_fp, .. } | EnvParams::Dataset { c_fp, .. } => *c_fp,
        }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            EnvParams::Mves { kappa, .. } | EnvParams::Dataset { kappa, .. } => *kappa,
        }
    }

    pub fn set_c_fp(&mut self, value: f64) {
        match self {
            EnvParams::Mves { c_fp, .. } | EnvParams::Dataset { c_fp, .. } => *c_fp = value,
        }
    }

    pub fn set_kappa(&mut self, value: f64) {
        match self {
            EnvParams::Mves { kappa, .. } | EnvParams::Dataset { kappa, .. } => *kappa = value,
        }
    }
}

/// Everything a run needs, in one serializable document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Experiment name; keys run directories and RNG scopes.
    pub label: String,
    pub task: TaskKind,
    pub mode: RunMode,
    pub horizon: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub k_tail: usize,
    /// Output directory, relative to the invocation root.
    pub out_dir: String,
    pub algorithms: Vec<AlgorithmKind>,
    pub constraints: ConstraintSpec,
    pub grid: GridSpec,
    pub env: EnvParams,
    pub ofs: OfsConfig,
    pub pd: PdConfig,
    pub unconstrained: ZoConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::config("experiment label must be non-empty"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        if self.k_tail == 0 || self.k_tail > self.horizon {
            return Err(Error::config(format!(
                "k_tail must lie in [1, horizon], got {} with horizon {}",
                self.k_tail, self.horizon
            )));
        }
        if Path::new(&self.out_dir).is_absolute() {
            return Err(Error::config("out_dir must be a relative path"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("at least one algorithm is required"));
        }
        if self.grid.k_theta < 2 {
            return Err(Error::config("grid needs at least 2 points"));
        }
        if !self.grid.from_pack && !(self.grid.theta_min < self.grid.theta_max) {
            return Err(Error::config("grid requires theta_min < theta_max"));
        }
        if self.grid.from_pack && !matches!(self.env, EnvParams::Dataset { .. }) {
            return Err(Error::config(
                "grid.from_pack requires a dataset environment",
            ));
        }
        match (&self.task, &self.env) {
            (TaskKind::Mves, EnvParams::Mves { .. }) => {}
            (TaskKind::German | TaskKind::Compas, EnvParams::Dataset { .. }) => {}
            _ => {
                return Err(Error::config(format!(
                    "task {} does not match the environment family",
                    self.task
                )))
            }
        }
        self.constraints.validate()?;
        self.ofs.validate()?;
        self.pd.validate()?;
        self.unconstrained.validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_toml(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn read_toml(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Applies `key=value` overrides addressed by dotted paths into the
    /// serialized form (`constraints.epsilon=0.01`, `env.kappa=0.2`,
    /// `horizon=500`). The value is coerced to the type of the field it
    /// replaces; absent optional leaves are inferred bool/int/float/string.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut value = toml::Value::try_from(self)
            .map_err(|e| Error::config(format!("config not serializable: {e}")))?;
        for item in overrides {
            let (path, raw) = item.split_once('=').ok_or_else(|| {
                Error::config(format!("override {item:?} is not of the form key=value"))
            })?;
            apply_override(&mut value, path.trim(), raw.trim())?;
        }
        let cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e| Error::config(format!("override produced an invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn apply_override(root: &mut toml::Value, path: &str, raw: &str) -> Result<()> {
    let mut segments: Vec<&str> = path.split('.').collect();
    let leaf = segments
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::config(format!("override path {path:?} is empty")))?;
    let mut node = root;
    for seg in &segments {
        node = node
            .get_mut(seg)
            .ok_or_else(|| Error::config(format!("override path {path:?}: no table {seg:?}")))?;
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::config(format!("override path {path:?} does not end in a table")))?;
    let new = match table.get(leaf) {
        Some(toml::Value::Boolean(_)) => toml::Value::Boolean(raw.parse().map_err(|_| {
            Error::config(format!("override {path:?}: {raw:?} is not a bool"))
        })?),
        Some(toml::Value::Integer(_)) => toml::Value::Integer(raw.parse().map_err(|_| {
            Error::config(format!("override {path:?}: {raw:?} is not an integer"))
        })?),
        Some(toml::Value::Float(_)) => toml::Value::Float(raw.parse().map_err(|_| {
            Error::config(format!("override {path:?}: {raw:?} is not a number"))
        })?),
        Some(toml::Value::String(_)) => toml::Value::String(raw.to_string()),
        Some(other) => {
            return Err(Error::config(format!(
                "override {path:?} targets unsupported field type {}",
                other.type_str()
            )))
        }
        // Absent leaf (e.g. an optional field): infer the type.
        None => {
            if let Ok(b) = raw.parse::<bool>() {
                toml::Value::Boolean(b)
            } else if let Ok(i) = raw.parse::<i64>() {
                toml::Value::Integer(i)
            } else if let Ok(f) = raw.parse::<f64>() {
                toml::Value::Float(f)
            } else {
                toml::Value::String(raw.to_string())
            }
        }
    };
    table.insert(leaf.to_string(), new);
    Ok(())
}
