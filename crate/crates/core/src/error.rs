use core::fmt;

use serde::{Deserialize, Serialize};

use crate::witness::Violation;

/// Which side of a table an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Col => "column",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("table is empty")]
    EmptyTable,
    #[error("row {row} has {found} entries, expected {expected}")]
    ShapeMismatch { row: usize, expected: usize, found: usize },
    #[error("entry ({row}, {col}) = {value} exceeds the bound {bound}")]
    BoundViolation { row: usize, col: usize, value: f64, bound: f64 },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("bound must be positive and finite, got {bound}")]
    InvalidBound { bound: f64 },
    #[error("{axis} labels: expected {expected}, found {found}")]
    LabelMismatch { axis: Axis, expected: usize, found: usize },
    #[error("thresholds need finite s < r, got s = {s}, r = {r}")]
    InvalidThresholds { s: f64, r: f64 },
    #[error("thresholds s = {s}, r = {r} fall outside the table bound {bound}")]
    ThresholdsOutOfRange { s: f64, r: f64, bound: f64 },
    #[error("epsilon must be positive and finite, got {eps}")]
    InvalidEpsilon { eps: f64 },
    #[error("{axis} index {index} out of range (len {len})")]
    IndexOutOfRange { axis: Axis, index: usize, len: usize },
    #[error("{k} columns requested; shattering checks are limited to 24")]
    TooManyColumns { k: usize },
    #[error("invalid witness: {0}")]
    InvalidWitness(Violation),
    #[error("search budget of {budget} nodes exhausted before the search resolved")]
    SearchBudgetExceeded { budget: u64 },
    #[error("exact enumeration needs {required} tuples, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("row subset is empty")]
    EmptySubset,
    #[error("column selection is empty")]
    EmptySelection,
    #[error("invalid size: {0}")]
    InvalidSize(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("solver stopped with duality gap {gap:e} above tolerance {tol:e}")]
    SolverFailure { gap: f64, tol: f64 },
}

impl Error {
    /// Stable snake_case identifier, used in serialized error entries.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyTable => "empty_table",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::BoundViolation { .. } => "bound_violation",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidBound { .. } => "invalid_bound",
            Error::LabelMismatch { .. } => "label_mismatch",
            Error::InvalidThresholds { .. } => "invalid_thresholds",
            Error::ThresholdsOutOfRange { .. } => "thresholds_out_of_range",
            Error::InvalidEpsilon { .. } => "invalid_epsilon",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::TooManyColumns { .. } => "too_many_columns",
            Error::InvalidWitness(_) => "invalid_witness",
            Error::SearchBudgetExceeded { .. } => "search_budget_exceeded",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::EmptySubset => "empty_subset",
            Error::EmptySelection => "empty_selection",
            Error::InvalidSize(_) => "invalid_size",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::SolverFailure { .. } => "solver_failure",
        }
    }

    /// Whether the error reports an exhausted search or enumeration budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::SearchBudgetExceeded { .. } | Error::BudgetExceeded { .. } | Error::SolverFailure { .. })
    }
}
