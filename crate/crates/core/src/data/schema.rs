//! Dataset schemas: column roles, label conventions, group encodings, and
//! row filters for the two bundled credit/recidivism tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Row-level keep/drop rules applied at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum RowFilter {
    /// Keep rows whose numeric cell lies in [min, max].
    NumericRange { column: String, min: f64, max: f64 },
    /// Drop rows whose cell equals the given raw string.
    Excludes { column: String, value: String },
}

impl RowFilter {
    pub fn column(&self) -> &str {
        match self {
            RowFilter::NumericRange { column, .. } => column,
            RowFilter::Excludes { column, .. } => column,
        }
    }
}

/// Column roles for one dataset: which columns become features, which one is
/// the label, which one carries the protected group, and which are parsed
/// only so filters can read them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    /// Feature columns in declaration order; order fixes the weight layout.
    pub features: Vec<(String, FeatureKind)>,
    /// Columns kept for filtering but never featurized.
    pub auxiliary: Vec<String>,
    pub label: String,
    /// Raw label value mapped to y = 1.
    pub label_positive: String,
    pub sensitive: String,
    /// Raw sensitive values mapped to group 1; everything else is group 0.
    pub group_one_values: Vec<String>,
    pub filters: Vec<RowFilter>,
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() || self.sensitive.is_empty() {
            return Err(Error::config(
                "schema needs exactly one label column and one sensitive column",
            ));
        }
        if self.group_one_values.is_empty() {
            return Err(Error::config("schema group_one_values must be non-empty"));
        }
        let mut names: Vec<&str> = self.features.iter().map(|(n, _)| n.as_str()).collect();
        names.extend(self.auxiliary.iter().map(String::as_str));
        names.push(&self.label);
        names.push(&self.sensitive);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::config("schema assigns some column two roles"));
        }
        for f in &self.filters {
            if !names.contains(&f.column()) {
                return Err(Error::config(format!(
                    "filter references unknown column {:?}",
                    f.column()
                )));
            }
        }
        Ok(())
    }

    /// Every column the loader must find in the CSV header.
    pub fn required_columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = self.features.iter().map(|(n, _)| n.as_str()).collect();
        cols.extend(self.auxiliary.iter().map(String::as_str));
        cols.push(&self.label);
        cols.push(&self.sensitive);
        cols
    }

    /// German credit table: symbolic attribute codes, y = 1 means good
    /// credit, sex is read off the combined personal-status code
    /// (A92/A95 are the female codes).
    pub fn german() -> Self {
        let features = vec![
            ("checking_status".into(), FeatureKind::Categorical),
            ("duration".into(), FeatureKind::Numeric),
            ("credit_history".into(), FeatureKind::Categorical),
            ("purpose".into(), FeatureKind::Categorical),
            ("credit_amount".into(), FeatureKind::Numeric),
            ("savings_status".into(), FeatureKind::Categorical),
            ("employment".into(), FeatureKind::Categorical),
            ("installment_commitment".into(), FeatureKind::Numeric),
            ("age".into(), FeatureKind::Numeric),
            ("housing".into(), FeatureKind::Categorical),
            ("existing_credits".into(), FeatureKind::Numeric),
            ("job".into(), FeatureKind::Categorical),
            ("num_dependents".into(), FeatureKind::Numeric),
        ];
        Self {
            name: "german".into(),
            features,
            auxiliary: vec![],
            label: "class".into(),
            label_positive: "1".into(),
            sensitive: "personal_status".into(),
            group_one_values: vec!["A92".into(), "A95".into()],
            filters: vec![],
        }
    }

    /// COMPAS two-year table with the standard screening filter: valid
    /// screening window, recidivism flag present, ordinary traffic offenses
    /// and unscored rows dropped. y = 1 means no recidivism within two
    /// years.
    pub fn compas() -> Self {
        let features = vec![
            ("age".into(), FeatureKind::Numeric),
            ("age_cat".into(), FeatureKind::Categorical),
            ("race".into(), FeatureKind::Categorical),
            ("juv_fel_count".into(), FeatureKind::Numeric),
            ("juv_misd_count".into(), FeatureKind::Numeric),
            ("priors_count".into(), FeatureKind::Numeric),
            ("c_charge_degree".into(), FeatureKind::Categorical),
            ("decile_score".into(), FeatureKind::Numeric),
        ];
        Self {
            name: "compas".into(),
            features,
            auxiliary: vec![
                "days_b_screening_arrest".into(),
                "is_recid".into(),
                "score_text".into(),
            ],
            label: "two_year_recid".into(),
            label_positive: "0".into(),
            sensitive: "sex".into(),
            group_one_values: vec!["Female".into()],
            filters: vec![
                RowFilter::NumericRange {
                    column: "days_b_screening_arrest".into(),
                    min: -30.0,
                    max: 30.0,
                },
                RowFilter::Excludes {
                    column: "is_recid".into(),
                    value: "-1".into(),
                },
                RowFilter::Excludes {
                    column: "c_charge_degree".into(),
                    value: "O".into(),
                },
                RowFilter::Excludes {
                    column: "score_text".into(),
                    value: "N/A".into(),
                },
            ],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "german" => Ok(Self::german()),
            "compas" => Ok(Self::compas()),
            other => Err(Error::config(format!("unknown dataset {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_schemas_validate() {
        DatasetSchema::german().validate().unwrap();
        DatasetSchema::compas().validate().unwrap();
    }

    #[test]
    fn duplicate_role_rejected() {
        let mut s = DatasetSchema::german();
        s.auxiliary.push("class".into());
        assert!(s.validate().is_err());
    }

    #[test]
    fn filter_must_reference_known_column() {
        let mut s = DatasetSchema::german();
        s.filters.push(RowFilter::Excludes {
            column: "nonexistent".into(),
            value: "x".into(),
        });
        assert!(s.validate().is_err());
    }

    #[test]
    fn by_name_round_trip() {
        assert_eq!(DatasetSchema::by_name("german").unwrap().name, "german");
        assert_eq!(DatasetSchema::by_name("compas").unwrap().label_positive, "0");
        assert!(DatasetSchema::by_name("adult").is_err());
    }
}
