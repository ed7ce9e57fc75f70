//! Cesàro averages of columns and optimal convex sup-norm approximation of a
//! target column.
//!
//! [`mazur_approximate`] solves the min-max program
//! `min t  s.t.  -t <= Σ_j w_j T[p][c_j] - target[p] <= t,  Σ w = 1,  w >= 0`
//! with the simplex method and certifies the result with the dual: any `z`
//! with `||z||_1 <= 1` gives the lower bound `min_j (zᵀA)_j - zᵀb` on the
//! optimum, so `achieved - bound` bounds the suboptimality.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lp::{self, LpOutcome};
use crate::table::EvalTable;

/// Per-row arithmetic mean of the selected columns.
pub fn cesaro_column(t: &EvalTable, cols: &[usize]) -> Result<Vec<f64>, Error> {
    if cols.is_empty() {
        return Err(Error::EmptySelection);
    }
    cols.iter().try_for_each(|&c| t.check_col(c))?;
    let n = cols.len() as f64;
    Ok(t.rows().map(|row| cols.iter().map(|&c| row[c]).sum::<f64>() / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexApproximation {
    pub candidate_cols: Vec<usize>,
    pub weights: Vec<f64>,
    /// `max_p |Σ_j w_j T[p][c_j] - target[p]|`, recomputed from `weights`.
    pub achieved: f64,
    /// Upper bound on `achieved - optimum`.
    pub certified_gap: f64,
}

/// Sup-norm distance between the combination of `cols` under `weights` and
/// `target`.
pub fn sup_distance(t: &EvalTable, cols: &[usize], weights: &[f64], target: &[f64]) -> f64 {
    t.rows()
        .zip(target)
        .map(|(row, &y)| {
            let v: f64 = cols.iter().zip(weights).map(|(&c, &w)| w * row[c]).sum();
            libm::fabs(v - y)
        })
        .fold(0.0, f64::max)
}

/// Best convex combination of the candidate columns in the sup norm.
///
/// Fails with [`Error::SolverFailure`] when the simplex does not finish or
/// the dual certificate leaves a gap above `tol`.
pub fn mazur_approximate(t: &EvalTable, candidates: &[usize], target: &[f64], tol: f64) -> Result<ConvexApproximation, Error> {
    if candidates.is_empty() {
        return Err(Error::EmptySelection);
    }
    candidates.iter().try_for_each(|&c| t.check_col(c))?;
    if target.len() != t.n_rows() {
        return Err(Error::InvalidArgument("target length must equal the number of rows"));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("target entries must be finite"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument("tol must be positive and finite"));
    }
    let k = candidates.len();
    let n = t.n_rows();

    // an exact member needs no solver
    if let Some(pos) = candidates.iter().position(|&c| t.rows().zip(target).all(|(row, &y)| row[c] == y)) {
        let mut weights = vec![0.0; k];
        weights[pos] = 1.0;
        return Ok(ConvexApproximation { candidate_cols: candidates.to_vec(), weights, achieved: 0.0, certified_gap: 0.0 });
    }

    // variables: w (k), t, s+ (n), s- (n); rows: n upper, n lower, simplex
    let n_vars = k + 1 + 2 * n;
    let n_cons = 2 * n + 1;
    let mut a = vec![0.0; n_cons * n_vars];
    let mut b = vec![0.0; n_cons];
    for p in 0..n {
        let (up, lo) = (p, n + p);
        for (j, &c) in candidates.iter().enumerate() {
            let v = t.get(p, c);
            a[up * n_vars + j] = v;
            a[lo * n_vars + j] = -v;
        }
        a[up * n_vars + k] = -1.0;
        a[lo * n_vars + k] = -1.0;
        a[up * n_vars + k + 1 + p] = 1.0;
        a[lo * n_vars + k + 1 + n + p] = 1.0;
        b[up] = target[p];
        b[lo] = -target[p];
    }
    a[2 * n * n_vars..2 * n * n_vars + k].iter_mut().for_each(|v| *v = 1.0);
    b[2 * n] = 1.0;
    let mut c = vec![0.0; n_vars];
    c[k] = 1.0;

    let max_iter = 50 * (n_vars + n_cons);
    let LpOutcome::Optimal { x, duals, .. } = lp::solve(&a, &b, &c, max_iter) else {
        return Err(Error::SolverFailure { gap: f64::INFINITY, tol });
    };

    let mut weights: Vec<f64> = x[..k].iter().map(|&w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::SolverFailure { gap: f64::INFINITY, tol });
    }
    weights.iter_mut().for_each(|w| *w /= total);
    let achieved = sup_distance(t, candidates, &weights, target);

    // z_p = y-_p - y+_p, scaled into the unit l1 ball
    let mut z: Vec<f64> = (0..n).map(|p| duals[n + p] - duals[p]).collect();
    let norm: f64 = z.iter().map(|v| libm::fabs(*v)).sum();
    if norm > 1.0 {
        z.iter_mut().for_each(|v| *v /= norm);
    }
    let zb: f64 = z.iter().zip(target).map(|(z, y)| z * y).sum();
    let lower = candidates
        .iter()
        .map(|&col| (0..n).map(|p| z[p] * t.get(p, col)).sum::<f64>() - zb)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let certified_gap = (achieved - lower).max(0.0);
    if certified_gap > tol {
        return Err(Error::SolverFailure { gap: certified_gap, tol });
    }
    Ok(ConvexApproximation { candidate_cols: candidates.to_vec(), weights, achieved, certified_gap })
}
