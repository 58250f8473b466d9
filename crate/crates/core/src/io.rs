//! Plain numeric CSV in and out.
//!
//! Input may carry one header row, detected by any field of the first row
//! failing to parse as a number. Floats are written in the shortest form
//! that parses back to the same value.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// How rows of a CSV file map onto the `p x n` data matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// `n` rows of `p` values each.
    #[default]
    RowsAreObservations,
    /// `p` rows of `n` values each.
    RowsAreVariables,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows-are-observations" => Ok(Layout::RowsAreObservations),
            "rows-are-variables" => Ok(Layout::RowsAreVariables),
            other => Err(Error::InvalidParameter(format!("unknown layout '{other}'"))),
        }
    }
}

/// Parses numeric CSV text into rows, skipping a detected header.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if idx == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                message: format!("'{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("'{field}' is not finite"),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line,
                    column: row.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no numeric rows".into(),
        });
    }
    Ok(rows)
}

pub fn parse_matrix(text: &str, layout: Layout) -> Result<DataMatrix> {
    let rows = parse_rows(text)?;
    match layout {
        Layout::RowsAreObservations => DataMatrix::from_columns(&rows),
        Layout::RowsAreVariables => DataMatrix::from_variable_rows(&rows),
    }
}

pub fn read_matrix(path: &Path, layout: Layout) -> Result<DataMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, layout)
}

/// Header-less CSV of `y` in the given layout.
pub fn format_matrix(y: &DataMatrix, layout: Layout) -> String {
    let mut out = String::new();
    let mut push_row = |row: &mut dyn Iterator<Item = f64>| {
        let fields: Vec<String> = row.map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    };
    match layout {
        Layout::RowsAreObservations => {
            for col in y.columns() {
                push_row(&mut col.iter().copied());
            }
        }
        Layout::RowsAreVariables => {
            for i in 0..y.p() {
                push_row(&mut (0..y.n()).map(|k| y.get(i, k)));
            }
        }
    }
    out
}

pub fn write_matrix(path: &Path, y: &DataMatrix, layout: Layout) -> Result<()> {
    fs::write(path, format_matrix(y, layout)).map_err(|e| Error::io(path, e))
}

/// One value per line, optionally under a header.
pub fn format_column(header: Option<&str>, values: &[f64]) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}
