use std::cmp::Ordering;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Real,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            Value::Text(_) => None,
        }
    }

    /// Ordering between comparable values: numbers with numbers, text with
    /// text. `None` for mixed kinds or NaN.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Text(_), _) | (_, Value::Text(_)) => None,
            (a, b) => a.as_f64()?.partial_cmp(&b.as_f64()?),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    /// `.json` is JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        }
    }
}

/// Typed relation. Column types are inferred per column: integer if every
/// cell parses as `i64`, else real if every cell parses as `f64`, else text.
#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    columns: Vec<String>,
    types: Vec<ColumnType>,
    rows: Vec<Vec<Value>>,
}

#[derive(Deserialize)]
struct JsonTable {
    columns: Vec<String>,
    rows: Vec<Vec<serde_json::Value>>,
}

impl TableData {
    /// Build from untyped cells; `lines[i]` is the source line of row `i`
    /// for error messages.
    fn from_cells(columns: Vec<String>, cells: Vec<Vec<String>>, lines: Vec<usize>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::MalformedRow { line: 1, message: "header has no columns".into() });
        }
        if cells.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (row, &line) in cells.iter().zip(&lines) {
            if row.len() != columns.len() {
                return Err(Error::MalformedRow {
                    line,
                    message: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
        }
        let types: Vec<ColumnType> = (0..columns.len())
            .map(|c| {
                if cells.iter().all(|r| r[c].trim().parse::<i64>().is_ok()) {
                    ColumnType::Integer
                } else if cells.iter().all(|r| r[c].trim().parse::<f64>().is_ok()) {
                    ColumnType::Real
                } else {
                    ColumnType::Text
                }
            })
            .collect();
        let rows = cells
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .zip(&types)
                    .map(|(cell, ty)| match ty {
                        ColumnType::Integer => Value::Int(cell.trim().parse().expect("inferred integer")),
                        ColumnType::Real => Value::Real(cell.trim().parse().expect("inferred real")),
                        ColumnType::Text => Value::Text(cell),
                    })
                    .collect()
            })
            .collect();
        Ok(Self { columns, types, rows })
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut cells = Vec::new();
        let mut lines = Vec::new();
        for record in rdr.records() {
            let record = record?;
            lines.push(record.position().map_or(0, |p| p.line() as usize));
            cells.push(record.iter().map(str::to_string).collect());
        }
        Self::from_cells(columns, cells, lines)
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with numbers or strings as cells.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let table: JsonTable = serde_json::from_str(text)?;
        let mut cells = Vec::with_capacity(table.rows.len());
        for (i, row) in table.rows.into_iter().enumerate() {
            let row = row
                .into_iter()
                .map(|v| match v {
                    serde_json::Value::Number(n) => Ok(n.to_string()),
                    serde_json::Value::String(s) => Ok(s),
                    other => Err(Error::MalformedRow {
                        line: i + 1,
                        message: format!("unsupported cell {other}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(row);
        }
        let lines = (1..=cells.len()).collect();
        Self::from_cells(table.columns, cells, lines)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_types(&self) -> &[ColumnType] {
        &self.types
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    /// Row count `N`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}

pub fn load_table(path: impl AsRef<Path>, format: TableFormat) -> Result<TableData> {
    let path = path.as_ref();
    match format {
        TableFormat::Csv => TableData::from_csv_reader(std::fs::File::open(path)?),
        TableFormat::Json => TableData::from_json_str(&std::fs::read_to_string(path)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_csv_types() {
        let t = TableData::from_csv_reader("age,score,name\n25,1.5,a\n40,2,b\n31,3,c\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.column_types(), &[ColumnType::Integer, ColumnType::Real, ColumnType::Text]);
        assert_eq!(t.rows()[1][0], Value::Int(40));
        assert_eq!(t.rows()[1][1], Value::Real(2.0));
    }

    #[test]
    fn missing_field_names_line() {
        let err = TableData::from_csv_reader("a,b,c\n1,2,3\n4,5\n".as_bytes()).unwrap_err();
        match err {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(err_line_in_message("a,b\n1,2\n3,4\n5\n", "line 4"));
    }

    fn err_line_in_message(csv: &str, needle: &str) -> bool {
        TableData::from_csv_reader(csv.as_bytes()).unwrap_err().to_string().contains(needle)
    }

    #[test]
    fn empty_table_rejected() {
        assert!(matches!(TableData::from_csv_reader("a,b\n".as_bytes()), Err(Error::EmptyTable)));
    }

    #[test]
    fn json_table() {
        let t = TableData::from_json_str(r#"{"columns": ["x", "s"], "rows": [[1, "p"], [2.5, "q"]]}"#).unwrap();
        assert_eq!(t.column_types(), &[ColumnType::Real, ColumnType::Text]);
        assert!(TableData::from_json_str(r#"{"columns": ["x"], "rows": [[null]]}"#).is_err());
        assert!(TableData::from_json_str(r#"{"columns": ["x", "y"], "rows": [[1]]}"#).is_err());
    }

    #[test]
    fn value_comparison() {
        assert_eq!(Value::Int(3).compare(&Value::Real(2.5)), Some(Ordering::Greater));
        assert_eq!(Value::Text("a".into()).compare(&Value::Text("b".into())), Some(Ordering::Less));
        assert_eq!(Value::Text("1".into()).compare(&Value::Int(1)), None);
    }
}
