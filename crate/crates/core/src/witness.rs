//! Witness certificates and their direct re-validation against a table.
//!
//! Every search in this crate returns one of these certificates. Validation
//! reads table entries directly and never reuses search state, so a valid
//! verdict is an independent re-check of the claim.
//!
//! All index sequences are injective: a witness that repeats a row or a
//! column is rejected before its inequalities are looked at.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Axis, Error};
use crate::table::{Epsilon, EvalTable, ThresholdPair};

/// Largest column count a shatter witness may carry (its selector has `2^k` keys).
pub const MAX_SHATTER_COLS: usize = 24;

/// Order-property ladder: for positions `k > l` the cell `(rows[k], cols[l])`
/// is `>= r`, for `k < l` it is `<= s`; diagonal cells are free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    #[serde(flatten)]
    pub thresholds: ThresholdPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AltVariant {
    /// `|T[i_t][j_u] - T[i_u][j_t]| >= eps` for all `t < u`.
    #[serde(rename = "ii")]
    Swap,
    /// `|T[i_u][j_t] - T[i_u][j_v]| >= eps` for all `t < u < v`.
    #[serde(rename = "iii")]
    Split,
}

impl AltVariant {
    pub fn name(self) -> &'static str {
        match self {
            AltVariant::Swap => "ii",
            AltVariant::Split => "iii",
        }
    }
}

/// A sequence of `(row, col)` pairs certifying an alternation rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternationWitness {
    pub variant: AltVariant,
    pub pairs: Vec<(usize, usize)>,
    pub eps: Epsilon,
}

/// An `(s, r)`-shattered column set with one realizing row per pattern.
///
/// Selector key `mask` encodes the pattern `I`: bit `i` set means column
/// `cols[i]` must be `<= s` at the selected row, clear means `>= r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub cols: Vec<usize>,
    #[serde(flatten)]
    pub thresholds: ThresholdPair,
    #[serde(serialize_with = "ser_selector", deserialize_with = "de_selector")]
    pub selector: BTreeMap<u32, usize>,
}

/// A literal strict-order chain: columns pointwise non-decreasing and
/// `T[rows[u]][cols[t]] + eps < T[rows[t]][cols[u]]` for all `t < u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainWitness {
    pub cols: Vec<usize>,
    pub rows: Vec<usize>,
    pub eps: Epsilon,
}

/// A relaxed chain: consecutive columns pointwise non-decreasing with one
/// row per step where the later column exceeds the earlier by at least `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepChainWitness {
    pub cols: Vec<usize>,
    pub step_rows: Vec<usize>,
    pub eps: Epsilon,
}

/// Any certificate, tagged by `kind` on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Ladder(LadderWitness),
    Alternation(AlternationWitness),
    Shatter(ShatterWitness),
    Chain(ChainWitness),
    StepChain(StepChainWitness),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellBound {
    AtLeast(f64),
    AtMost(f64),
}

impl core::fmt::Display for CellBound {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CellBound::AtLeast(v) => write!(f, ">= {v}"),
            CellBound::AtMost(v) => write!(f, "<= {v}"),
        }
    }
}

/// The first constraint a witness fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    #[error("witness has no positions")]
    Empty,
    #[error("sequence lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("{axis} index {index} is repeated")]
    RepeatedIndex { axis: Axis, index: usize },
    #[error("cell ({row}, {col}) = {value} is not {expected}")]
    Cell { row: usize, col: usize, value: f64, expected: CellBound },
    #[error("cells {first:?} and {second:?} differ by {difference}, less than {eps}")]
    Separation { first: (usize, usize), second: (usize, usize), difference: f64, eps: f64 },
    #[error("shatter witness has {k} columns, above the limit")]
    TooManyColumns { k: usize },
    #[error("selector has no row for pattern {mask:#b}")]
    IncompleteSelector { mask: u32 },
    #[error("selector key {mask:#b} is not a pattern over the witness columns")]
    UnknownPattern { mask: u32 },
    #[error("column {lower} exceeds column {upper} at row {row}")]
    NotDominated { lower: usize, upper: usize, row: usize },
    #[error("cross condition fails: cell {lower:?} + {eps} is not below cell {upper:?}")]
    CrossGap { lower: (usize, usize), upper: (usize, usize), eps: f64 },
    #[error("row {row} does not separate column {lower} from column {upper} by {eps}")]
    NoStep { lower: usize, upper: usize, row: usize, eps: f64 },
}

/// Outcome of re-checking a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Verdict::Valid => None,
            Verdict::Invalid(v) => Some(v),
        }
    }

    fn from_check(check: Result<(), Violation>) -> Self {
        match check {
            Ok(()) => Verdict::Valid,
            Err(v) => Verdict::Invalid(v),
        }
    }

    /// Turns an invalid verdict into [`Error::InvalidWitness`].
    pub fn into_result(self) -> Result<(), Error> {
        match self {
            Verdict::Valid => Ok(()),
            Verdict::Invalid(v) => Err(Error::InvalidWitness(v)),
        }
    }
}

/// Re-checks any witness against `t`.
///
/// Returns [`Error::IndexOutOfRange`] when an index falls outside the table;
/// otherwise the verdict names the first violated constraint.
pub fn validate_witness(t: &EvalTable, w: &Witness) -> Result<Verdict, Error> {
    match w {
        Witness::Ladder(w) => w.validate(t),
        Witness::Alternation(w) => w.validate(t),
        Witness::Shatter(w) => w.validate(t),
        Witness::Chain(w) => w.validate(t),
        Witness::StepChain(w) => w.validate(t),
    }
}

fn check_rows(t: &EvalTable, rows: impl IntoIterator<Item = usize>) -> Result<(), Error> {
    rows.into_iter().try_for_each(|r| t.check_row(r))
}

fn check_cols(t: &EvalTable, cols: impl IntoIterator<Item = usize>) -> Result<(), Error> {
    cols.into_iter().try_for_each(|c| t.check_col(c))
}

fn injective(axis: Axis, seq: impl IntoIterator<Item = usize>) -> Result<(), Violation> {
    let mut seen = BTreeMap::new();
    for index in seq {
        if seen.insert(index, ()).is_some() {
            return Err(Violation::RepeatedIndex { axis, index });
        }
    }
    Ok(())
}

fn cell(t: &EvalTable, row: usize, col: usize, expected: CellBound) -> Result<(), Violation> {
    let value = t.get(row, col);
    let ok = match expected {
        CellBound::AtLeast(r) => value >= r,
        CellBound::AtMost(s) => value <= s,
    };
    if ok {
        Ok(())
    } else {
        Err(Violation::Cell { row, col, value, expected })
    }
}

fn separated(t: &EvalTable, first: (usize, usize), second: (usize, usize), eps: f64) -> Result<(), Violation> {
    let difference = (t.get(first.0, first.1) - t.get(second.0, second.1)).abs();
    if difference >= eps {
        Ok(())
    } else {
        Err(Violation::Separation { first, second, difference, eps })
    }
}

fn dominated(t: &EvalTable, lower: usize, upper: usize) -> Result<(), Violation> {
    match (0..t.n_rows()).find(|&row| t.get(row, lower) > t.get(row, upper)) {
        Some(row) => Err(Violation::NotDominated { lower, upper, row }),
        None => Ok(()),
    }
}

impl LadderWitness {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn validate(&self, t: &EvalTable) -> Result<Verdict, Error> {
        check_rows(t, self.rows.iter().copied())?;
        check_cols(t, self.cols.iter().copied())?;
        Ok(Verdict::from_check(self.check(t)))
    }

    fn check(&self, t: &EvalTable) -> Result<(), Violation> {
        if self.rows.is_empty() {
            return Err(Violation::Empty);
        }
        if self.rows.len() != self.cols.len() {
            return Err(Violation::LengthMismatch { left: self.rows.len(), right: self.cols.len() });
        }
        injective(Axis::Row, self.rows.iter().copied())?;
        injective(Axis::Col, self.cols.iter().copied())?;
        let (s, r) = (self.thresholds.s(), self.thresholds.r());
        for (k, &row) in self.rows.iter().enumerate() {
            for (l, &col) in self.cols.iter().enumerate() {
                if k > l {
                    cell(t, row, col, CellBound::AtLeast(r))?;
                } else if k < l {
                    cell(t, row, col, CellBound::AtMost(s))?;
                }
            }
        }
        Ok(())
    }

    /// The same ladder read in the dual table: roles swapped, both
    /// sequences reversed.
    pub fn dual(&self) -> LadderWitness {
        LadderWitness {
            rows: self.cols.iter().rev().copied().collect(),
            cols: self.rows.iter().rev().copied().collect(),
            thresholds: self.thresholds,
        }
    }
}

impl AlternationWitness {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn validate(&self, t: &EvalTable) -> Result<Verdict, Error> {
        check_rows(t, self.pairs.iter().map(|p| p.0))?;
        check_cols(t, self.pairs.iter().map(|p| p.1))?;
        Ok(Verdict::from_check(self.check(t)))
    }

    fn check(&self, t: &EvalTable) -> Result<(), Violation> {
        if self.pairs.is_empty() {
            return Err(Violation::Empty);
        }
        injective(Axis::Row, self.pairs.iter().map(|p| p.0))?;
        injective(Axis::Col, self.pairs.iter().map(|p| p.1))?;
        let eps = self.eps.get();
        let n = self.pairs.len();
        match self.variant {
            AltVariant::Swap => {
                for a in 0..n {
                    for b in a + 1..n {
                        let (ia, ja) = self.pairs[a];
                        let (ib, jb) = self.pairs[b];
                        separated(t, (ia, jb), (ib, ja), eps)?;
                    }
                }
            }
            AltVariant::Split => {
                for mid in 1..n {
                    let row = self.pairs[mid].0;
                    for before in 0..mid {
                        for after in mid + 1..n {
                            separated(t, (row, self.pairs[before].1), (row, self.pairs[after].1), eps)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl ShatterWitness {
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Selected row for the pattern whose low set is `mask`.
    pub fn row_for(&self, mask: u32) -> Option<usize> {
        self.selector.get(&mask).copied()
    }

    pub fn validate(&self, t: &EvalTable) -> Result<Verdict, Error> {
        check_cols(t, self.cols.iter().copied())?;
        check_rows(t, self.selector.values().copied())?;
        Ok(Verdict::from_check(self.check(t)))
    }

    fn check(&self, t: &EvalTable) -> Result<(), Violation> {
        let k = self.cols.len();
        if k == 0 {
            return Err(Violation::Empty);
        }
        if k > MAX_SHATTER_COLS {
            return Err(Violation::TooManyColumns { k });
        }
        injective(Axis::Col, self.cols.iter().copied())?;
        let patterns = 1u32 << k;
        if let Some(&mask) = self.selector.keys().find(|&&m| m >= patterns) {
            return Err(Violation::UnknownPattern { mask });
        }
        let (s, r) = (self.thresholds.s(), self.thresholds.r());
        for mask in 0..patterns {
            let Some(&row) = self.selector.get(&mask) else {
                return Err(Violation::IncompleteSelector { mask });
            };
            for (i, &col) in self.cols.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    cell(t, row, col, CellBound::AtMost(s))?;
                } else {
                    cell(t, row, col, CellBound::AtLeast(r))?;
                }
            }
        }
        Ok(())
    }
}

impl ChainWitness {
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn validate(&self, t: &EvalTable) -> Result<Verdict, Error> {
        check_cols(t, self.cols.iter().copied())?;
        check_rows(t, self.rows.iter().copied())?;
        Ok(Verdict::from_check(self.check(t)))
    }

    fn check(&self, t: &EvalTable) -> Result<(), Violation> {
        if self.cols.is_empty() {
            return Err(Violation::Empty);
        }
        if self.cols.len() != self.rows.len() {
            return Err(Violation::LengthMismatch { left: self.cols.len(), right: self.rows.len() });
        }
        injective(Axis::Col, self.cols.iter().copied())?;
        injective(Axis::Row, self.rows.iter().copied())?;
        for pair in self.cols.windows(2) {
            dominated(t, pair[0], pair[1])?;
        }
        let eps = self.eps.get();
        let m = self.cols.len();
        for a in 0..m {
            for b in a + 1..m {
                let lower = (self.rows[b], self.cols[a]);
                let upper = (self.rows[a], self.cols[b]);
                if !(t.get(lower.0, lower.1) + eps < t.get(upper.0, upper.1)) {
                    return Err(Violation::CrossGap { lower, upper, eps });
                }
            }
        }
        Ok(())
    }
}

impl StepChainWitness {
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn validate(&self, t: &EvalTable) -> Result<Verdict, Error> {
        check_cols(t, self.cols.iter().copied())?;
        check_rows(t, self.step_rows.iter().copied())?;
        Ok(Verdict::from_check(self.check(t)))
    }

    fn check(&self, t: &EvalTable) -> Result<(), Violation> {
        if self.cols.is_empty() {
            return Err(Violation::Empty);
        }
        if self.step_rows.len() + 1 != self.cols.len() {
            return Err(Violation::LengthMismatch { left: self.cols.len(), right: self.step_rows.len() + 1 });
        }
        injective(Axis::Col, self.cols.iter().copied())?;
        let eps = self.eps.get();
        for (pair, &row) in self.cols.windows(2).zip(&self.step_rows) {
            let (lower, upper) = (pair[0], pair[1]);
            dominated(t, lower, upper)?;
            if !(t.get(row, upper) >= t.get(row, lower) + eps) {
                return Err(Violation::NoStep { lower, upper, row, eps });
            }
        }
        Ok(())
    }
}

fn ser_selector<S: Serializer>(selector: &BTreeMap<u32, usize>, ser: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = ser.serialize_map(Some(selector.len()))?;
    for (mask, row) in selector {
        map.serialize_entry(&mask.to_string(), row)?;
    }
    map.end()
}

fn de_selector<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<u32, usize>, D::Error> {
    let raw = BTreeMap::<String, usize>::deserialize(de)?;
    raw.into_iter()
        .map(|(key, row)| {
            key.parse::<u32>()
                .map(|mask| (mask, row))
                .map_err(|_| serde::de::Error::custom("selector keys must be decimal bitmasks"))
        })
        .collect()
}
