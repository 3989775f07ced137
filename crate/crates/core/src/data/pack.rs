//! Environment packs: the serialized endpoint of the data pipeline.
//!
//! A pack bundles everything the composition-shift environment needs (score
//! pools, group mix, score range) together with the trained model and the
//! SHA-256 of the source CSV. Environments load packs, never raw CSVs, and a
//! pack can be checked against a CSV to detect tampering or drift.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::encode::{encode_features, ColumnProvenance, StandardizationStats};
use crate::data::logistic::{score_rows, train_score_model, ScoreModel, TrainConfig};
use crate::data::pools::{build_pools, GroupPools};
use crate::data::schema::DatasetSchema;
use crate::data::table::{group_column, label_column, load_table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvPack {
    pub dataset: String,
    pub csv_sha256: String,
    pub rows_raw: usize,
    pub rows: usize,
    /// Empirical share of group 1 among kept rows.
    pub group_one_fraction: f64,
    pub score_min: f64,
    pub score_max: f64,
    pub model: ScoreModel,
    pub standardization: Vec<StandardizationStats>,
    pub columns: Vec<ColumnProvenance>,
    pub pools: GroupPools,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Run the pipeline end to end: load and filter, encode, train, score,
/// split pools, and stamp the CSV hash.
pub fn build_env_pack(
    csv_path: &Path,
    schema: &DatasetSchema,
    train: &TrainConfig,
    quantile: f64,
) -> Result<EnvPack> {
    let table = load_table(csv_path, schema)?;
    let labels = label_column(&table, schema)?;
    let groups = group_column(&table, schema)?;
    let matrix = encode_features(&table, schema)?;
    let model = train_score_model(&matrix, &labels, train)?;
    let scores = score_rows(&model, &matrix)?;
    let pools = build_pools(&scores, &labels, &groups, quantile)?;
    pools.pools.validate()?;

    let score_min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let score_max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ones = groups.iter().filter(|&&g| g == 1).count();
    Ok(EnvPack {
        dataset: schema.name.clone(),
        csv_sha256: sha256_file(csv_path)?,
        rows_raw: table.raw_row_count(),
        rows: table.len(),
        group_one_fraction: ones as f64 / table.len() as f64,
        score_min,
        score_max,
        model,
        standardization: matrix.stats().to_vec(),
        columns: matrix.provenance().to_vec(),
        pools,
    })
}

pub fn save_env_pack(pack: &EnvPack, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(pack)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_env_pack(path: &Path) -> Result<EnvPack> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Pack(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Pack(format!("cannot parse {}: {e}", path.display())))
}

/// Fail loudly if the pack was not built from exactly this CSV.
pub fn verify_pack_source(pack: &EnvPack, csv_path: &Path) -> Result<()> {
    let actual = sha256_file(csv_path)?;
    if actual != pack.csv_sha256 {
        return Err(Error::Pack(format!(
            "pack for {:?} was built from a different CSV: recorded {}, found {} at {}",
            pack.dataset,
            pack.csv_sha256,
            actual,
            csv_path.display()
        )));
    }
    Ok(())
}
