//! Dataset pipeline: ingestion, encoding, the logistic score model, pool
//! construction, and environment packs.

pub mod encode;
pub mod logistic;
pub mod pack;
pub mod pools;
pub mod schema;
pub mod synth;
pub mod table;

pub use encode::{encode_features, ColumnProvenance, FeatureEncoder, FeatureMatrix};
pub use logistic::{score_rows, train_score_model, ScoreModel, TrainConfig};
pub use pack::{
    build_env_pack, load_env_pack, save_env_pack, sha256_hex, verify_pack_source, EnvPack,
};
pub use pools::{build_pools, GroupPools};
pub use schema::{DatasetSchema, FeatureKind, RowFilter};
pub use synth::{generate_compas, generate_german, COMPAS_SCOPE, GERMAN_SCOPE};
pub use table::{group_column, label_column, load_table, RawTable};
