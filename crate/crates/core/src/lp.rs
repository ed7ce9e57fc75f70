//! Dense two-phase tableau simplex for `min c·x  s.t.  A x = b, x >= 0`.
//!
//! Bland's rule throughout, so the method terminates on degenerate
//! problems. Sized for the small min-max programs built by
//! [`crate::definability`].

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, duals: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    /// `rows x (n_vars + n_rows + 1)`, last column is the right-hand side.
    cells: Vec<f64>,
    width: usize,
    n_rows: usize,
    n_vars: usize,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.cells[row * w + col];
        for c in 0..w {
            self.cells[row * w + c] /= p;
        }
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        for r in 0..self.n_rows {
            if r == row {
                continue;
            }
            let f = self.cells[r * w + col];
            if f != 0.0 {
                for (c, &pv) in pivot_row.iter().enumerate() {
                    self.cells[r * w + c] -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced cost of column `col` under `cost` (indexed over all columns).
    fn reduced_cost(&self, cost: &[f64], col: usize) -> f64 {
        let mut z = 0.0;
        for r in 0..self.n_rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                z += cb * self.at(r, col);
            }
        }
        cost[col] - z
    }

    /// Runs simplex iterations on `cost` over the columns `< allowed`.
    /// Returns `Some(false)` if unbounded, `None` on the iteration limit.
    fn optimize(&mut self, cost: &[f64], allowed: usize, max_iter: usize) -> Option<bool> {
        for _ in 0..max_iter {
            let entering = (0..allowed).find(|&c| !self.basis.contains(&c) && self.reduced_cost(cost, c) < -PIVOT_TOL);
            let Some(col) = entering else {
                return Some(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.n_rows {
                let a = self.at(r, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, best)) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && self.basis[r] < self.basis[lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Some(false),
            }
        }
        None
    }
}

/// Solves the program. `a` is row-major `b.len() x c.len()`.
///
/// Duals are returned for the original (unflipped) equality rows and satisfy
/// `A^T y <= c` at an optimum, with `b·y` equal to the optimal objective.
pub(crate) fn solve(a: &[f64], b: &[f64], c: &[f64], max_iter: usize) -> LpOutcome {
    let (m, n) = (b.len(), c.len());
    debug_assert_eq!(a.len(), m * n);
    let width = n + m + 1;
    let mut cells = vec![0.0; m * width];
    let mut sign = vec![1.0; m];
    for r in 0..m {
        sign[r] = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            cells[r * width + j] = sign[r] * a[r * n + j];
        }
        cells[r * width + n + r] = 1.0;
        cells[r * width + width - 1] = sign[r] * b[r];
    }
    let mut tab = Tableau { cells, width, n_rows: m, n_vars: n, basis: (n..n + m).collect() };

    // phase one: drive the artificials to zero
    let mut cost1 = vec![0.0; width - 1];
    cost1[n..n + m].iter_mut().for_each(|v| *v = 1.0);
    match tab.optimize(&cost1, n + m, max_iter) {
        None => return LpOutcome::IterationLimit,
        Some(false) => return LpOutcome::Infeasible,
        Some(true) => {}
    }
    let infeas: f64 = (0..m).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs(r)).sum();
    if infeas > FEAS_TOL {
        return LpOutcome::Infeasible;
    }
    // pivot zero-level artificials out where a structural column allows it
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !tab.basis.contains(&j) && tab.at(r, j).abs() > PIVOT_TOL) {
                tab.pivot(r, col);
            }
        }
    }

    // phase two: artificial columns may not re-enter
    let mut cost2 = vec![0.0; width - 1];
    cost2[..n].copy_from_slice(c);
    match tab.optimize(&cost2, n, max_iter) {
        None => return LpOutcome::IterationLimit,
        Some(false) => return LpOutcome::Unbounded,
        Some(true) => {}
    }

    let mut x = vec![0.0; tab.n_vars];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r);
        }
    }
    // the artificial block of the tableau holds B^-1, so y = c_B^T B^-1
    let duals = (0..m)
        .map(|i| sign[i] * (0..m).map(|r| cost2[tab.basis[r]] * tab.at(r, n + i)).sum::<f64>())
        .collect();
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, duals, objective }
}
