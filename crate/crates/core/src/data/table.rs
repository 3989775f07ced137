//! CSV ingestion: header checks, typed access, and filter application.

use std::path::Path;

use crate::data::schema::{DatasetSchema, RowFilter};
use crate::error::{Error, Result};

/// A loaded, filtered table. Cells stay as raw strings; numeric parsing
/// happens where a consumer declares a numeric use, so an unparseable cell
/// is reported with its row and column.
#[derive(Debug, Clone)]
pub struct RawTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    raw_row_count: usize,
}

impl RawTable {
    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row count before filters, for provenance records.
    pub fn raw_row_count(&self) -> usize {
        self.raw_row_count
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config(format!("column {name:?} not in table")))
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.rows[row][col]
    }

    /// All raw values of one column.
    pub fn column(&self, name: &str) -> Result<Vec<&str>> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    /// One column parsed as f64, errors naming the offending row.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| parse_cell(&r[idx], i + 1, name))
            .collect()
    }
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Ingestion {
        path: String::new(),
        message: format!("row {row}, column {column:?}: cannot parse {cell:?} as a number"),
    })
}

/// Load a CSV, verify the schema's columns exist, and apply its row filters.
pub fn load_table(path: &Path, schema: &DatasetSchema) -> Result<RawTable> {
    schema.validate()?;
    let display = path.display().to_string();
    let ingestion = |message: String| Error::Ingestion {
        path: display.clone(),
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ingestion(format!("cannot open: {e}")))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| ingestion(format!("bad header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    for col in schema.required_columns() {
        if !headers.iter().any(|h| h == col) {
            return Err(ingestion(format!("missing column {col:?}")));
        }
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ingestion(format!("row {}: {e}", i + 1)))?;
        if record.len() != headers.len() {
            return Err(ingestion(format!(
                "row {}: {} fields, expected {}",
                i + 1,
                record.len(),
                headers.len()
            )));
        }
        rows.push(record.iter().map(str::to_string).collect::<Vec<String>>());
    }
    if rows.is_empty() {
        return Err(ingestion("no data rows".into()));
    }
    let raw_row_count = rows.len();

    let filter_cols: Vec<usize> = schema
        .filters
        .iter()
        .map(|f| headers.iter().position(|h| h == f.column()).unwrap())
        .collect();
    let mut kept = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let mut keep = true;
        for (f, &col) in schema.filters.iter().zip(&filter_cols) {
            match f {
                RowFilter::NumericRange { column, min, max } => {
                    let v = parse_cell(&row[col], i + 1, column)
                        .map_err(|e| ingestion(e.to_string()))?;
                    if v < *min || v > *max {
                        keep = false;
                        break;
                    }
                }
                RowFilter::Excludes { value, .. } => {
                    if row[col] == *value {
                        keep = false;
                        break;
                    }
                }
            }
        }
        if keep {
            kept.push(row);
        }
    }
    if kept.is_empty() {
        return Err(ingestion("all rows removed by filters".into()));
    }
    log::info!(
        "loaded {display}: {raw_row_count} rows, {} after filters",
        kept.len()
    );

    Ok(RawTable {
        headers,
        rows: kept,
        raw_row_count,
    })
}

/// Group indicator per row: 1 when the sensitive cell is one of the schema's
/// group-one values.
pub fn group_column(table: &RawTable, schema: &DatasetSchema) -> Result<Vec<u8>> {
    let values = table.column(&schema.sensitive)?;
    Ok(values
        .iter()
        .map(|v| u8::from(schema.group_one_values.iter().any(|g| g == v)))
        .collect())
}

/// Binary labels per row under the schema's positive-value convention.
pub fn label_column(table: &RawTable, schema: &DatasetSchema) -> Result<Vec<u8>> {
    let values = table.column(&schema.label)?;
    Ok(values
        .iter()
        .map(|v| u8::from(*v == schema.label_positive))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn tiny_schema() -> DatasetSchema {
        DatasetSchema {
            name: "tiny".into(),
            features: vec![("x".into(), crate::data::schema::FeatureKind::Numeric)],
            auxiliary: vec!["window".into()],
            label: "y".into(),
            label_positive: "1".into(),
            sensitive: "g".into(),
            group_one_values: vec!["b".into()],
            filters: vec![RowFilter::NumericRange {
                column: "window".into(),
                min: -1.0,
                max: 1.0,
            }],
        }
    }

    #[test]
    fn loads_and_filters() {
        let f = write_csv("x,window,y,g\n1.0,0,1,a\n2.0,5,0,b\n3.0,-1,0,b\n");
        let t = load_table(f.path(), &tiny_schema()).unwrap();
        assert_eq!(t.raw_row_count(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.column("x").unwrap(), vec!["1.0", "3.0"]);
        assert_eq!(group_column(&t, &tiny_schema()).unwrap(), vec![0, 1]);
        assert_eq!(label_column(&t, &tiny_schema()).unwrap(), vec![1, 0]);
    }

    #[test]
    fn missing_column_is_an_ingestion_error() {
        let f = write_csv("x,window,y\n1.0,0,1\n");
        let err = load_table(f.path(), &tiny_schema()).unwrap_err();
        assert!(err.to_string().contains("\"g\""), "{err}");
    }

    #[test]
    fn empty_file_rejected() {
        let f = write_csv("x,window,y,g\n");
        assert!(load_table(f.path(), &tiny_schema()).is_err());
    }

    #[test]
    fn unparseable_filter_cell_names_row_and_column() {
        let f = write_csv("x,window,y,g\n1.0,zero,1,a\n");
        let err = load_table(f.path(), &tiny_schema()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("window"), "{msg}");
    }

    #[test]
    fn numeric_column_error_names_location() {
        let f = write_csv("x,window,y,g\n1.0,0,1,a\noops,0,1,a\n");
        let t = load_table(f.path(), &tiny_schema()).unwrap();
        let err = t.numeric_column("x").unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }
}
