//! Table ingestion and serialization.
//!
//! JSON is the canonical, lossless format (`{"bound", "entries",
//! "row_labels"?, "col_labels"?}`); floats round-trip bit-exactly. CSV is
//! headerless numerics, one row per line, with the bound defaulting to the
//! largest absolute entry.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use dline_core::{Error, EvalTable};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses the format from a file extension; anything but `.csv` is JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, field {field}: {message}")]
    Parse { line: u64, field: usize, message: String },
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Table(#[from] Error),
}

fn parse_cell(text: &str, line: u64, field: usize) -> Result<f64, LoadError> {
    let v = f64::from_str(text.trim()).map_err(|_| LoadError::Parse {
        line,
        field,
        message: format!("not a number: {:?}", text),
    })?;
    if !v.is_finite() {
        return Err(LoadError::Parse { line, field, message: format!("not finite: {:?}", text) });
    }
    Ok(v)
}

/// Parses headerless CSV. `bound` overrides the max-abs default.
pub fn parse_csv(input: &[u8], bound: Option<f64>) -> Result<EvalTable, LoadError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| LoadError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            field: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record.iter().enumerate().map(|(i, cell)| parse_cell(cell, line, i + 1)).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let table = match bound {
        Some(b) => EvalTable::from_rows(rows, b)?,
        None => EvalTable::from_rows_auto_bound(rows)?,
    };
    Ok(table)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTable {
    bound: f64,
    entries: Vec<Vec<f64>>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

/// Parses the JSON table schema; the bound is mandatory. Table invariant
/// failures surface as [`LoadError::Table`].
pub fn parse_json(input: &[u8]) -> Result<EvalTable, LoadError> {
    let raw: JsonTable = serde_json::from_slice(input)?;
    Ok(EvalTable::from_rows(raw.entries, raw.bound)?.with_labels(raw.row_labels, raw.col_labels)?)
}

pub fn load_table(input: &[u8], format: Format, bound: Option<f64>) -> Result<EvalTable, LoadError> {
    match format {
        Format::Csv => parse_csv(input, bound),
        Format::Json => parse_json(input),
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, LoadError> {
    let mut buf = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    Ok(buf)
}

/// Loads a table file; the format defaults to the one implied by the extension.
pub fn load_table_file(path: &Path, format: Option<Format>, bound: Option<f64>) -> Result<EvalTable, LoadError> {
    load_table(&read_file(path)?, format.unwrap_or_else(|| Format::from_path(path)), bound)
}

/// Reads a real vector: a JSON array, or a CSV column/row of numbers.
pub fn load_vector(path: &Path) -> Result<Vec<f64>, LoadError> {
    let bytes = read_file(path)?;
    let values: Vec<f64> = match Format::from_path(path) {
        Format::Json => serde_json::from_slice(&bytes)?,
        Format::Csv => {
            let t = parse_csv(&bytes, None)?;
            t.entries().to_vec()
        }
    };
    Ok(values)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Compact JSON, used for digests.
pub fn to_compact_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

/// Headerless CSV. Floats are written in shortest round-trip form.
pub fn to_csv(t: &EvalTable) -> String {
    let mut out = String::new();
    for row in t.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_examples() {
        let t = parse_csv(b"0,1\n1,0", None).unwrap();
        assert_eq!((t.n_rows(), t.n_cols(), t.bound()), (2, 2, 1.0));
        assert_eq!(t.entries(), &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(parse_csv(b"0,1\n1", None), Err(LoadError::Table(Error::ShapeMismatch { .. }))));
        assert!(matches!(parse_csv(b"0,x\n", None), Err(LoadError::Parse { line: 1, field: 2, .. })));
        assert!(matches!(parse_csv(b"", None), Err(LoadError::Table(Error::EmptyTable))));
        assert!(matches!(parse_csv(b"0,2\n", Some(1.0)), Err(LoadError::Table(Error::BoundViolation { .. }))));
    }

    #[test]
    fn json_examples() {
        let bad = br#"{"bound": 1, "entries": [[0, 2.5]]}"#;
        assert!(matches!(parse_json(bad), Err(LoadError::Table(Error::BoundViolation { .. }))));
        assert!(parse_json(br#"{"entries": [[0]]}"#).is_err());
        let t = parse_json(br#"{"bound": 2, "entries": [[0.1, -2]], "col_labels": ["a", "b"]}"#).unwrap();
        assert_eq!(parse_json(to_json(&t).as_bytes()).unwrap(), t);
    }

    #[test]
    fn csv_round_trip() {
        let t = parse_csv(b"0.1,0.2\n-0.3,1e-17\n", None).unwrap();
        assert_eq!(parse_csv(to_csv(&t).as_bytes(), Some(t.bound())).unwrap(), t);
    }
}
