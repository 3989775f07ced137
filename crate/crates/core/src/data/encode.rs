//! Feature encoding: one-hot blocks with lexicographic category order and
//! numeric standardization with population statistics.

use serde::{Deserialize, Serialize};

use crate::data::schema::{DatasetSchema, FeatureKind};
use crate::data::table::RawTable;
use crate::error::{Error, Result};

/// Where an output column came from: its source column and, for one-hot
/// columns, the category it indicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnProvenance {
    pub source: String,
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub column: String,
    pub mean: f64,
    /// Population standard deviation; zero marks a constant column, which
    /// encodes to all zeros.
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    provenance: Vec<ColumnProvenance>,
    stats: Vec<StandardizationStats>,
    warnings: Vec<String>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn provenance(&self) -> &[ColumnProvenance] {
        &self.provenance
    }

    pub fn stats(&self) -> &[StandardizationStats] {
        &self.stats
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Output column indices belonging to one source column's one-hot block.
    pub fn block(&self, source: &str) -> Vec<usize> {
        self.provenance
            .iter()
            .enumerate()
            .filter(|(_, p)| p.source == source && p.category.is_some())
            .map(|(i, _)| i)
            .collect()
    }
}

enum FittedColumn {
    Numeric { name: String, mean: f64, std: f64 },
    Categorical { name: String, categories: Vec<String> },
}

/// Fit-then-transform encoder. Fitting fixes category lists and
/// standardization statistics; transforming a table with a category never
/// seen at fit time is an error.
pub struct FeatureEncoder {
    columns: Vec<FittedColumn>,
}

impl FeatureEncoder {
    pub fn fit(table: &RawTable, schema: &DatasetSchema) -> Result<Self> {
        let mut columns = Vec::with_capacity(schema.features.len());
        for (name, kind) in &schema.features {
            match kind {
                FeatureKind::Numeric => {
                    let values = table.numeric_column(name)?;
                    let m = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / m;
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
                    columns.push(FittedColumn::Numeric {
                        name: name.clone(),
                        mean,
                        std: var.sqrt(),
                    });
                }
                FeatureKind::Categorical => {
                    let mut categories: Vec<String> =
                        table.column(name)?.iter().map(|s| s.to_string()).collect();
                    categories.sort_unstable();
                    categories.dedup();
                    columns.push(FittedColumn::Categorical {
                        name: name.clone(),
                        categories,
                    });
                }
            }
        }
        Ok(Self { columns })
    }

    pub fn transform(&self, table: &RawTable) -> Result<FeatureMatrix> {
        let rows = table.len();
        let mut provenance = Vec::new();
        let mut stats = Vec::new();
        let mut warnings = Vec::new();
        for col in &self.columns {
            match col {
                FittedColumn::Numeric { name, mean, std } => {
                    provenance.push(ColumnProvenance {
                        source: name.clone(),
                        category: None,
                    });
                    stats.push(StandardizationStats {
                        column: name.clone(),
                        mean: *mean,
                        std: *std,
                    });
                    if *std == 0.0 {
                        let w = format!("column {name:?} is constant; encoded as zeros");
                        log::warn!("{w}");
                        warnings.push(w);
                    }
                }
                FittedColumn::Categorical { name, categories } => {
                    for c in categories {
                        provenance.push(ColumnProvenance {
                            source: name.clone(),
                            category: Some(c.clone()),
                        });
                    }
                }
            }
        }

        let cols = provenance.len();
        let mut values = vec![0.0; rows * cols];
        let mut out_col = 0usize;
        for col in &self.columns {
            match col {
                FittedColumn::Numeric { name, mean, std } => {
                    let raw = table.numeric_column(name)?;
                    for (i, v) in raw.iter().enumerate() {
                        values[i * cols + out_col] =
                            if *std == 0.0 { 0.0 } else { (v - mean) / std };
                    }
                    out_col += 1;
                }
                FittedColumn::Categorical { name, categories } => {
                    let raw = table.column(name)?;
                    for (i, v) in raw.iter().enumerate() {
                        let k = categories.iter().position(|c| c == v).ok_or_else(|| {
                            Error::Encode(format!(
                                "row {}, column {name:?}: unseen category {v:?}",
                                i + 1
                            ))
                        })?;
                        values[i * cols + out_col + k] = 1.0;
                    }
                    out_col += categories.len();
                }
            }
        }

        Ok(FeatureMatrix {
            rows,
            cols,
            values,
            provenance,
            stats,
            warnings,
        })
    }
}

/// Fit and transform in one step, for full-table training.
pub fn encode_features(table: &RawTable, schema: &DatasetSchema) -> Result<FeatureMatrix> {
    FeatureEncoder::fit(table, schema)?.transform(table)
}
