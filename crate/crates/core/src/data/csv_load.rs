//! CSV ingestion (RFC-4180 quoting, UTF-8, no header row). Column kinds are
//! inferred unless declared: a column whose every non-missing cell parses as
//! a number is numeric, anything else is nominal with its value domain in
//! first-appearance order. '?' and empty cells are missing.

use std::io::Read;

use super::arff::build_dataset;
use super::{AttributeSpec, Dataset};
use crate::error::{Error, Result};

/// Declared kind for one CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Nominal,
    Numeric,
}

pub fn load_csv<R: Read>(
    source: R,
    class_column: usize,
    declared_kinds: Option<&[ColumnKind]>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut rows: Vec<(usize, Vec<Option<String>>)> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 1;
        let record = record.map_err(|e| Error::parse(line_no, e.to_string()))?;
        let cells: Vec<Option<String>> = record
            .iter()
            .map(|f| {
                if f == "?" || f.is_empty() {
                    None
                } else {
                    Some(f.to_string())
                }
            })
            .collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::parse(
                    line_no,
                    format!("ragged row: {} fields, expected {}", cells.len(), w),
                ));
            }
            _ => {}
        }
        rows.push((line_no, cells));
    }

    let width = width.ok_or_else(|| Error::parse(0, "empty CSV document"))?;
    if width < 2 {
        return Err(Error::parse(
            0,
            "a CSV document needs at least one attribute plus a class column",
        ));
    }
    if class_column >= width {
        return Err(Error::config(format!(
            "class column {class_column} out of bounds ({width} columns)"
        )));
    }
    if let Some(kinds) = declared_kinds {
        if kinds.len() != width {
            return Err(Error::config(format!(
                "declared {} column kinds for {} columns",
                kinds.len(),
                width
            )));
        }
    }

    let mut attrs = Vec::with_capacity(width);
    for col in 0..width {
        let name = if col == class_column {
            "class".to_string()
        } else {
            format!("attr{col}")
        };
        let declared = declared_kinds.map(|k| k[col]);
        let kind = if col == class_column {
            // the class is always treated as nominal
            ColumnKind::Nominal
        } else {
            declared.unwrap_or_else(|| infer_kind(&rows, col))
        };
        match kind {
            ColumnKind::Numeric => attrs.push(AttributeSpec::numeric(name)),
            ColumnKind::Nominal => {
                let mut domain: Vec<String> = Vec::new();
                for (_, cells) in &rows {
                    if let Some(v) = &cells[col] {
                        if !domain.iter().any(|d| d == v) {
                            domain.push(v.clone());
                        }
                    }
                }
                if domain.is_empty() {
                    return Err(Error::data(format!(
                        "column {col} has no observed values"
                    )));
                }
                attrs.push(AttributeSpec::nominal(name, domain));
            }
        }
    }

    build_dataset("csv".to_string(), attrs, class_column, rows)
}

fn infer_kind(rows: &[(usize, Vec<Option<String>>)], col: usize) -> ColumnKind {
    let mut saw_value = false;
    for (_, cells) in rows {
        if let Some(v) = &cells[col] {
            saw_value = true;
            if v.parse::<f64>().is_err() {
                return ColumnKind::Nominal;
            }
        }
    }
    if saw_value {
        ColumnKind::Numeric
    } else {
        ColumnKind::Nominal
    }
}
