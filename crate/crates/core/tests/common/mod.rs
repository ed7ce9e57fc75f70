//! Exhaustive brute-force oracles. Each one enumerates index sequences or
//! subsets directly and checks the defining inequalities cell by cell,
//! sharing no code with the pruned searches.

#![allow(dead_code)]

use dline_core::EvalTable;

/// Calls `f` on every injective sequence of length `len` over `0..n`.
pub fn for_each_arrangement(n: usize, len: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(n: usize, len: usize, seq: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if seq.len() == len {
            return f(seq);
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                seq.push(i);
                let stop = go(n, len, seq, used, f);
                seq.pop();
                used[i] = false;
                if stop {
                    return true;
                }
            }
        }
        false
    }
    go(n, len, &mut Vec::new(), &mut vec![false; n], f)
}

/// Whether some pair of injective row/column sequences of length `len`
/// satisfies `ok(rows, cols)`. Sequences grow one `(row, col)` position at a
/// time and `ok` is applied to every prefix, which is exhaustive because
/// every predicate used here is closed under truncation.
fn exists_pair(t: &EvalTable, len: usize, ok: &dyn Fn(&[usize], &[usize]) -> bool) -> bool {
    fn go(t: &EvalTable, len: usize, rows: &mut Vec<usize>, cols: &mut Vec<usize>, ok: &dyn Fn(&[usize], &[usize]) -> bool) -> bool {
        if rows.len() == len {
            return true;
        }
        for r in 0..t.n_rows() {
            if rows.contains(&r) {
                continue;
            }
            for c in 0..t.n_cols() {
                if cols.contains(&c) {
                    continue;
                }
                rows.push(r);
                cols.push(c);
                let hit = ok(rows, cols) && go(t, len, rows, cols, ok);
                rows.pop();
                cols.pop();
                if hit {
                    return true;
                }
            }
        }
        false
    }
    len <= t.n_rows() && len <= t.n_cols() && go(t, len, &mut Vec::new(), &mut Vec::new(), ok)
}

/// Largest `len` with a hit. Every predicate used here is closed under
/// deleting a position, so the first failing length ends the scan.
fn max_len(t: &EvalTable, ok: &dyn Fn(&[usize], &[usize]) -> bool) -> usize {
    let mut best = 1;
    while exists_pair(t, best + 1, ok) {
        best += 1;
    }
    best
}

pub fn ladder_ok(t: &EvalTable, s: f64, r: f64, rows: &[usize], cols: &[usize]) -> bool {
    let n = rows.len();
    (0..n).all(|k| (0..n).all(|l| k == l || if k > l { t.get(rows[k], cols[l]) >= r } else { t.get(rows[k], cols[l]) <= s }))
}

pub fn max_ladder(t: &EvalTable, s: f64, r: f64) -> usize {
    max_len(t, &|rows, cols| ladder_ok(t, s, r, rows, cols))
}

pub fn swap_ok(t: &EvalTable, eps: f64, rows: &[usize], cols: &[usize]) -> bool {
    let n = rows.len();
    (0..n).all(|a| (a + 1..n).all(|b| (t.get(rows[a], cols[b]) - t.get(rows[b], cols[a])).abs() >= eps))
}

pub fn split_ok(t: &EvalTable, eps: f64, rows: &[usize], cols: &[usize]) -> bool {
    let n = rows.len();
    (0..n).all(|a| (a + 1..n).all(|u| (u + 1..n).all(|v| (t.get(rows[u], cols[a]) - t.get(rows[u], cols[v])).abs() >= eps)))
}

pub fn alternation_swap(t: &EvalTable, eps: f64) -> usize {
    max_len(t, &|rows, cols| swap_ok(t, eps, rows, cols))
}

pub fn alternation_split(t: &EvalTable, eps: f64) -> usize {
    max_len(t, &|rows, cols| split_ok(t, eps, rows, cols))
}

/// Whether the columns in `cols` are `(s, r)`-shattered by the rows.
pub fn shattered(t: &EvalTable, cols: &[usize], s: f64, r: f64) -> bool {
    (0u32..1 << cols.len()).all(|mask| {
        (0..t.n_rows()).any(|p| {
            cols.iter().enumerate().all(|(i, &c)| if mask >> i & 1 == 1 { t.get(p, c) <= s } else { t.get(p, c) >= r })
        })
    })
}

/// Largest shattered column subset, over all subsets.
pub fn shattering_dimension(t: &EvalTable, s: f64, r: f64) -> usize {
    let m = t.n_cols();
    assert!(m <= 16, "oracle enumerates all column subsets");
    (0u32..1 << m)
        .filter_map(|set| {
            let cols: Vec<usize> = (0..m).filter(|&c| set >> c & 1 == 1).collect();
            shattered(t, &cols, s, r).then_some(cols.len())
        })
        .max()
        .unwrap_or(0)
}

/// `a <= b` pointwise and some row rises by at least `eps`.
pub fn strict_step(t: &EvalTable, a: usize, b: usize, eps: f64) -> bool {
    (0..t.n_rows()).all(|p| t.get(p, a) <= t.get(p, b)) && (0..t.n_rows()).any(|p| t.get(p, b) >= t.get(p, a) + eps)
}

/// Longest column sequence whose consecutive pairs are strict steps.
pub fn strict_chain(t: &EvalTable, eps: f64) -> usize {
    let mut best = 1;
    for len in 2..=t.n_cols() {
        let found = for_each_arrangement(t.n_cols(), len, &mut |cols| cols.windows(2).all(|w| strict_step(t, w[0], w[1], eps)));
        if !found {
            break;
        }
        best = len;
    }
    best
}

/// Literal cross-condition chain of length `len`: columns pointwise
/// non-decreasing and `T[w_u][c_t] + eps < T[w_t][c_u]` for `t < u`.
pub fn literal_chain_exists(t: &EvalTable, eps: f64, len: usize) -> bool {
    exists_pair(t, len, &|rows, cols| {
        cols.windows(2).all(|w| (0..t.n_rows()).all(|p| t.get(p, w[0]) <= t.get(p, w[1])))
            && (0..rows.len()).all(|a| (a + 1..rows.len()).all(|b| t.get(rows[b], cols[a]) + eps < t.get(rows[a], cols[b])))
    })
}

/// `|D_k|` by enumerating every `2k`-tuple from `subset`.
pub fn dk_count(t: &EvalTable, subset: &[usize], k: usize, s: f64, r: f64, distinct: bool) -> u64 {
    let len = 2 * k;
    let mut count = 0u64;
    let mut idx = vec![0usize; len];
    loop {
        let tuple: Vec<usize> = idx.iter().map(|&i| subset[i]).collect();
        let admissible = !distinct || (0..len).all(|a| (a + 1..len).all(|b| tuple[a] != tuple[b]));
        if admissible
            && (0..t.n_cols()).any(|c| (0..k).all(|i| t.get(tuple[2 * i], c) <= s && t.get(tuple[2 * i + 1], c) >= r))
        {
            count += 1;
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == len {
                return count;
            }
            idx[pos] += 1;
            if idx[pos] < subset.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Whether the rows `rows` are shattered by the columns (non-strict).
pub fn rows_shattered(t: &EvalTable, rows: &[usize], s: f64, r: f64) -> bool {
    shattered(&t.transpose(), rows, s, r)
}

/// Sup distance of `Σ w_j T[.][c_j]` to `target`.
pub fn sup_distance(t: &EvalTable, cols: &[usize], w: &[f64], target: &[f64]) -> f64 {
    (0..t.n_rows())
        .map(|p| (cols.iter().zip(w).map(|(&c, &wj)| wj * t.get(p, c)).sum::<f64>() - target[p]).abs())
        .fold(0.0, f64::max)
}

/// Minimum of the sup distance over the simplex grid with step `1/steps`
/// (up to three candidates).
pub fn mazur_grid(t: &EvalTable, cols: &[usize], target: &[f64], steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    match cols.len() {
        1 => sup_distance(t, cols, &[1.0], target),
        2 => (0..=steps).map(|i| sup_distance(t, cols, &[i as f64 * h, 1.0 - i as f64 * h], target)).fold(f64::INFINITY, f64::min),
        3 => {
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let w = [i as f64 * h, j as f64 * h, (steps - i - j) as f64 * h];
                    best = best.min(sup_distance(t, cols, &w, target));
                }
            }
            best
        }
        _ => panic!("grid oracle handles up to three candidates"),
    }
}

/// The `{0,1}` table whose cell `(p, c)` is bit `p * cols + c` of `bits`.
pub fn binary_table(rows: usize, cols: usize, bits: u64) -> EvalTable {
    let entries = (0..rows * cols).map(|i| (bits >> i & 1) as f64).collect();
    EvalTable::from_flat(rows, cols, entries, 1.0).unwrap()
}
