//! Evaluation tables and the dividing-line parameters applied to them.
//!
//! Rows are the x-side points, columns are the y-side parameters. Column `j`
//! is read as the function `row -> entries[row][j]`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error};

/// A bounded, finite, row-major real matrix.
///
/// Entries are immutable once constructed; every analysis reads through
/// [`EvalTable::get`], [`EvalTable::row`] or [`EvalTable::column`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct EvalTable {
    n_rows: usize,
    n_cols: usize,
    bound: f64,
    entries: Vec<f64>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

/// Wire form of a table: `{"bound", "entries", "row_labels"?, "col_labels"?}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRepr {
    bound: f64,
    entries: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    col_labels: Option<Vec<String>>,
}

impl TryFrom<TableRepr> for EvalTable {
    type Error = Error;

    fn try_from(repr: TableRepr) -> Result<Self, Error> {
        EvalTable::from_rows(repr.entries, repr.bound)?.with_labels(repr.row_labels, repr.col_labels)
    }
}

impl From<EvalTable> for TableRepr {
    fn from(t: EvalTable) -> Self {
        TableRepr {
            bound: t.bound,
            entries: t.rows().map(|r| r.to_vec()).collect(),
            row_labels: t.row_labels,
            col_labels: t.col_labels,
        }
    }
}

impl EvalTable {
    /// Builds a table from nested rows, checking shape, finiteness and the bound.
    pub fn from_rows(rows: Vec<Vec<f64>>, bound: f64) -> Result<Self, Error> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidBound { bound });
        }
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyTable);
        }
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != n_cols {
                return Err(Error::ShapeMismatch { row, expected: n_cols, found: values.len() });
            }
            entries.extend(values);
        }
        Self::from_flat(n_rows, n_cols, entries, bound)
    }

    /// Builds a table from a row-major buffer of length `n_rows * n_cols`.
    pub fn from_flat(n_rows: usize, n_cols: usize, entries: Vec<f64>, bound: f64) -> Result<Self, Error> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidBound { bound });
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyTable);
        }
        if entries.len() != n_rows * n_cols {
            return Err(Error::ShapeMismatch {
                row: entries.len() / n_cols,
                expected: n_rows * n_cols,
                found: entries.len(),
            });
        }
        for (idx, &value) in entries.iter().enumerate() {
            let (row, col) = (idx / n_cols, idx % n_cols);
            if !value.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            if value.abs() > bound {
                return Err(Error::BoundViolation { row, col, value, bound });
            }
        }
        Ok(EvalTable { n_rows, n_cols, bound, entries, row_labels: None, col_labels: None })
    }

    /// Like [`EvalTable::from_rows`] with the bound set to the largest absolute
    /// entry (or 1 when every entry is zero).
    pub fn from_rows_auto_bound(rows: Vec<Vec<f64>>) -> Result<Self, Error> {
        let max_abs = rows
            .iter()
            .flatten()
            .filter(|v| v.is_finite())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let bound = if max_abs > 0.0 { max_abs } else { 1.0 };
        Self::from_rows(rows, bound)
    }

    /// Attaches optional labels; each sequence must match its dimension.
    pub fn with_labels(mut self, row_labels: Option<Vec<String>>, col_labels: Option<Vec<String>>) -> Result<Self, Error> {
        if let Some(labels) = &row_labels {
            if labels.len() != self.n_rows {
                return Err(Error::LabelMismatch { axis: Axis::Row, expected: self.n_rows, found: labels.len() });
            }
        }
        if let Some(labels) = &col_labels {
            if labels.len() != self.n_cols {
                return Err(Error::LabelMismatch { axis: Axis::Col, expected: self.n_cols, found: labels.len() });
            }
        }
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries[row * self.n_cols + col]
    }

    /// Bounds-checked access.
    pub fn try_get(&self, row: usize, col: usize) -> Result<f64, Error> {
        self.check_row(row)?;
        self.check_col(col)?;
        Ok(self.get(row, col))
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.entries.chunks_exact(self.n_cols)
    }

    /// Column `col` as an owned vector (columns are strided in storage).
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|row| self.get(row, col)).collect()
    }

    /// Row-major view of every entry.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub(crate) fn check_row(&self, index: usize) -> Result<(), Error> {
        if index < self.n_rows {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { axis: Axis::Row, index, len: self.n_rows })
        }
    }

    pub(crate) fn check_col(&self, index: usize) -> Result<(), Error> {
        if index < self.n_cols {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { axis: Axis::Col, index, len: self.n_cols })
        }
    }

    /// The dual table: `result[j][i] = self[i][j]`, with labels swapped.
    pub fn transpose(&self) -> EvalTable {
        let mut entries = Vec::with_capacity(self.entries.len());
        for col in 0..self.n_cols {
            entries.extend((0..self.n_rows).map(|row| self.get(row, col)));
        }
        EvalTable {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            bound: self.bound,
            entries,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Sorted distinct entry values (`-0.0` and `0.0` collapse).
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut values = self.entries.clone();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| a == b);
        values
    }
}

impl fmt::Debug for EvalTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "EvalTable {}x{} (bound {})", self.n_rows, self.n_cols, self.bound)?;
        for row in self.rows() {
            writeln!(f, "  {:?}", row)?;
        }
        Ok(())
    }
}

/// A threshold pair `s < r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub struct ThresholdPair {
    s: f64,
    r: f64,
}

#[derive(Serialize, Deserialize)]
struct ThresholdRepr {
    s: f64,
    r: f64,
}

impl TryFrom<ThresholdRepr> for ThresholdPair {
    type Error = Error;
    fn try_from(repr: ThresholdRepr) -> Result<Self, Error> {
        ThresholdPair::new(repr.s, repr.r)
    }
}

impl From<ThresholdPair> for ThresholdRepr {
    fn from(th: ThresholdPair) -> Self {
        ThresholdRepr { s: th.s, r: th.r }
    }
}

impl ThresholdPair {
    pub fn new(s: f64, r: f64) -> Result<Self, Error> {
        if s.is_finite() && r.is_finite() && s < r {
            Ok(ThresholdPair { s, r })
        } else {
            Err(Error::InvalidThresholds { s, r })
        }
    }

    /// The lower threshold.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// The upper threshold.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn gap(&self) -> f64 {
        self.r - self.s
    }

    #[inline]
    pub fn is_low(&self, value: f64) -> bool {
        value <= self.s
    }

    #[inline]
    pub fn is_high(&self, value: f64) -> bool {
        value >= self.r
    }

    /// Use-site check that both thresholds lie within the table's bound.
    pub fn check_within(&self, t: &EvalTable) -> Result<(), Error> {
        if self.s.abs() <= t.bound() && self.r.abs() <= t.bound() {
            Ok(())
        } else {
            Err(Error::ThresholdsOutOfRange { s: self.s, r: self.r, bound: t.bound() })
        }
    }
}

/// A strictly positive separation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl TryFrom<f64> for Epsilon {
    type Error = Error;
    fn try_from(eps: f64) -> Result<Self, Error> {
        Epsilon::new(eps)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self, Error> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Epsilon(eps))
        } else {
            Err(Error::InvalidEpsilon { eps })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}
