//! Strict-order-property detection.
//!
//! Columns are pre-ordered by `psi(c1, c2) = max_p max(0, T[p][c1] - T[p][c2])`,
//! which is zero exactly when `c1 <= c2` pointwise. [`strict_chain`] is the
//! polynomial screen (longest path through pointwise steps that rise by
//! `eps` somewhere); [`sop_witness`] searches for the literal cross condition
//! and produces certificates.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::search::{Budget, Found};
use crate::table::{Epsilon, EvalTable};
use crate::witness::{AltVariant, AlternationWitness, ChainWitness, StepChainWitness};

/// Pairwise `psi` values between columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreorderMatrix {
    n_cols: usize,
    psi: Vec<f64>,
}

impl PreorderMatrix {
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn psi(&self, lower: usize, upper: usize) -> f64 {
        self.psi[lower * self.n_cols + upper]
    }

    /// `lower <= upper` pointwise.
    pub fn dominated(&self, lower: usize, upper: usize) -> bool {
        self.psi(lower, upper) <= 0.0
    }
}

pub fn preorder_psi(t: &EvalTable) -> PreorderMatrix {
    let m = t.n_cols();
    let mut psi = vec![0.0; m * m];
    for row in t.rows() {
        for (a, &va) in row.iter().enumerate() {
            for (b, &vb) in row.iter().enumerate() {
                let d = va - vb;
                if d > psi[a * m + b] {
                    psi[a * m + b] = d;
                }
            }
        }
    }
    PreorderMatrix { n_cols: m, psi }
}

/// First row where column `upper` exceeds column `lower` by at least `eps`.
fn step_row(t: &EvalTable, lower: usize, upper: usize, eps: f64) -> Option<usize> {
    (0..t.n_rows()).find(|&p| t.get(p, upper) >= t.get(p, lower) + eps)
}

/// Edges `c -> c'` of the strict-step graph: `c <= c'` pointwise and some
/// row rises by at least `eps`.
pub fn strict_edges(t: &EvalTable, eps: Epsilon) -> Vec<(usize, usize)> {
    let pre = preorder_psi(t);
    let m = t.n_cols();
    let mut edges = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a != b && pre.dominated(a, b) && step_row(t, a, b, eps.get()).is_some() {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Longest path in the strict-step graph, computed exactly.
///
/// A pointwise `<=` step that rises somewhere moves strictly forward in the
/// lexicographic order of column vectors, so sorting columns that way gives a
/// topological order. Ties between equally long paths go to the smallest
/// column indices.
pub fn strict_chain(t: &EvalTable, eps: Epsilon) -> Found<StepChainWitness> {
    let m = t.n_cols();
    let pre = preorder_psi(t);
    let columns: Vec<Vec<f64>> = (0..m).map(|c| t.column(c)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        columns[a]
            .iter()
            .zip(&columns[b])
            .map(|(x, y)| x.partial_cmp(y).expect("finite entries"))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });

    // longest[c]: vertices on the longest path ending at c; prev[c]: predecessor
    let mut longest = vec![1usize; m];
    let mut prev: Vec<Option<usize>> = vec![None; m];
    for (pos, &c) in order.iter().enumerate() {
        for &p in &order[..pos] {
            if pre.dominated(p, c) && step_row(t, p, c, eps.get()).is_some() {
                let len = longest[p] + 1;
                let better = len > longest[c] || (len == longest[c] && prev[c].is_some_and(|q| p < q));
                if better {
                    longest[c] = len;
                    prev[c] = Some(p);
                }
            }
        }
    }
    let end = (0..m).max_by(|&a, &b| longest[a].cmp(&longest[b]).then(b.cmp(&a))).expect("at least one column");
    let mut cols = vec![end];
    while let Some(p) = prev[*cols.last().expect("non-empty")] {
        cols.push(p);
    }
    cols.reverse();
    let step_rows = cols
        .windows(2)
        .map(|w| step_row(t, w[0], w[1], eps.get()).expect("edge has a step row"))
        .collect();
    Found { value: cols.len(), witness: StepChainWitness { cols, step_rows, eps }, exact: true, nodes: 0 }
}

/// Backtracking search for a literal chain of length `target_m`.
///
/// Returns `Ok(None)` when the search completes without finding one and
/// [`Error::SearchBudgetExceeded`] when the budget runs out first.
pub fn sop_witness(t: &EvalTable, eps: Epsilon, target_m: usize, node_budget: u64) -> Result<Option<ChainWitness>, Error> {
    if target_m < 2 {
        return Err(Error::InvalidArgument("sop_witness needs target_m >= 2"));
    }
    if target_m > t.n_cols() || target_m > t.n_rows() || eps.get() >= 2.0 * t.bound() {
        return Ok(None);
    }
    let mut search = ChainSearch {
        t,
        pre: preorder_psi(t),
        eps: eps.get(),
        target: target_m,
        budget: Budget::new(node_budget),
        cols: Vec::new(),
        rows: Vec::new(),
        used_rows: vec![false; t.n_rows()],
        used_cols: vec![false; t.n_cols()],
    };
    if search.extend() {
        Ok(Some(ChainWitness { cols: search.cols, rows: search.rows, eps }))
    } else if search.budget.exhausted() {
        Err(Error::SearchBudgetExceeded { budget: node_budget })
    } else {
        Ok(None)
    }
}

struct ChainSearch<'a> {
    t: &'a EvalTable,
    pre: PreorderMatrix,
    eps: f64,
    target: usize,
    budget: Budget,
    cols: Vec<usize>,
    rows: Vec<usize>,
    used_rows: Vec<bool>,
    used_cols: Vec<bool>,
}

impl ChainSearch<'_> {
    /// Returns `true` once the chain reaches the target length.
    fn extend(&mut self) -> bool {
        if self.cols.len() == self.target {
            return true;
        }
        let free_rows = self.used_rows.iter().filter(|u| !**u).count();
        for c in 0..self.t.n_cols() {
            if self.used_cols[c] || self.cols.last().is_some_and(|&last| !self.pre.dominated(last, c)) {
                continue;
            }
            let above = (0..self.t.n_cols()).filter(|&d| !self.used_cols[d] && d != c && self.pre.dominated(c, d)).count();
            if self.cols.len() + 1 + above.min(free_rows.saturating_sub(1)) < self.target {
                continue;
            }
            for w in 0..self.t.n_rows() {
                if self.used_rows[w] {
                    continue;
                }
                if !self.budget.tick() {
                    return false;
                }
                // earlier (c_t, w_t): T[w][c_t] + eps < T[w_t][c]
                let crosses = self.cols.iter().zip(&self.rows).all(|(&ct, &wt)| self.t.get(w, ct) + self.eps < self.t.get(wt, c));
                if !crosses {
                    continue;
                }
                self.cols.push(c);
                self.rows.push(w);
                self.used_cols[c] = true;
                self.used_rows[w] = true;
                if self.extend() {
                    return true;
                }
                self.cols.pop();
                self.rows.pop();
                self.used_cols[c] = false;
                self.used_rows[w] = false;
                if self.budget.exhausted() {
                    return false;
                }
            }
        }
        false
    }
}

/// Reads a literal chain as a variant-(ii) alternation with pairs `(w_t, c_t)`.
pub fn sop_to_alternation(t: &EvalTable, w: &ChainWitness) -> Result<AlternationWitness, Error> {
    w.validate(t)?.into_result()?;
    Ok(AlternationWitness {
        variant: AltVariant::Swap,
        pairs: w.rows.iter().copied().zip(w.cols.iter().copied()).collect(),
        eps: w.eps,
    })
}
