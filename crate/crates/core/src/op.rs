//! Order-property detection: ladders, alternation ranks, the stability
//! spectrum and the iterated-means diagnostic.

use alloc::vec;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::search::{full_set, vec_of_sets, Budget, Found, ThresholdMasks};
use crate::table::{Epsilon, EvalTable, ThresholdPair};
use crate::witness::{AltVariant, AlternationWitness, LadderWitness};

/// Longest `(s, r)`-ladder in `t`, searched with at most `node_budget` nodes.
///
/// Always returns at least a length-1 ladder. Among ladders of maximal
/// length the witness is the first in lexicographic order of the
/// interleaved sequence `(row_1, col_1, row_2, col_2, ...)`.
pub fn max_ladder(t: &EvalTable, th: ThresholdPair, node_budget: u64) -> Found<LadderWitness> {
    ladder_search(t, th, node_budget, usize::MAX)
}

/// As [`max_ladder`] but stops as soon as a ladder of length `cap` is found.
pub(crate) fn ladder_search(t: &EvalTable, th: ThresholdPair, node_budget: u64, cap: usize) -> Found<LadderWitness> {
    let masks = ThresholdMasks::new(t, th);
    let mut search = LadderSearch {
        masks: &masks,
        budget: Budget::new(node_budget),
        cap: cap.min(t.n_rows()).min(t.n_cols()).max(1),
        rows: Vec::new(),
        cols: Vec::new(),
        best: (vec![0], vec![0]),
    };
    search.extend(&full_set(t.n_rows()), &full_set(t.n_cols()));
    let (rows, cols) = search.best;
    Found {
        value: rows.len(),
        witness: LadderWitness { rows, cols, thresholds: th },
        exact: !search.budget.exhausted(),
        nodes: search.budget.used(),
    }
}

struct LadderSearch<'a> {
    masks: &'a ThresholdMasks,
    budget: Budget,
    cap: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    best: (Vec<usize>, Vec<usize>),
}

impl LadderSearch<'_> {
    /// `rows`: unused rows `>= r` on every chosen column; `cols`: unused
    /// columns `<= s` on every chosen row. Any pair from the two sets extends
    /// the ladder.
    fn extend(&mut self, rows: &FixedBitSet, cols: &FixedBitSet) -> bool {
        let depth = self.rows.len();
        for i in rows.ones() {
            for j in cols.ones() {
                if !self.budget.tick() {
                    return true;
                }
                let mut next_rows = rows.clone();
                next_rows.set(i, false);
                next_rows.intersect_with(&self.masks.high_rows[j]);
                let mut next_cols = cols.clone();
                next_cols.set(j, false);
                next_cols.intersect_with(&self.masks.low_cols[i]);

                self.rows.push(i);
                self.cols.push(j);
                if depth + 1 > self.best.0.len() {
                    self.best = (self.rows.clone(), self.cols.clone());
                }
                let reach = depth + 1 + next_rows.count_ones(..).min(next_cols.count_ones(..));
                let stop = self.best.0.len() >= self.cap
                    || (reach > self.best.0.len() && self.extend(&next_rows, &next_cols));
                self.rows.pop();
                self.cols.pop();
                if stop {
                    return true;
                }
                // nothing below this row can reach further than the current best
                if depth + rows.count_ones(..).min(cols.count_ones(..)) <= self.best.0.len() {
                    return false;
                }
            }
        }
        false
    }
}

/// Longest alternation sequence of the given variant at separation `eps`.
pub fn alternation_rank(t: &EvalTable, eps: Epsilon, variant: AltVariant, node_budget: u64) -> Found<AlternationWitness> {
    let (pairs, exact, nodes) = match variant {
        AltVariant::Swap => swap_clique(t, eps.get(), node_budget),
        AltVariant::Split => split_search(t, eps.get(), node_budget),
    };
    Found { value: pairs.len(), witness: AlternationWitness { variant, pairs, eps }, exact, nodes }
}

/// Variant (ii) constraints are symmetric in the two positions, so a valid
/// sequence is a clique in the compatibility graph on cells; its order is
/// irrelevant. Pairs come back sorted.
fn swap_clique(t: &EvalTable, eps: f64, node_budget: u64) -> (Vec<(usize, usize)>, bool, u64) {
    let (n, m) = (t.n_rows(), t.n_cols());
    let cells = n * m;
    let mut adj = vec_of_sets(cells, cells);
    for a in 0..cells {
        let (ia, ja) = (a / m, a % m);
        for b in a + 1..cells {
            let (ib, jb) = (b / m, b % m);
            if ia != ib && ja != jb && (t.get(ia, jb) - t.get(ib, ja)).abs() >= eps {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    let mut search = CliqueSearch {
        adj: &adj,
        n_cols: m,
        budget: Budget::new(node_budget),
        clique: Vec::new(),
        best: vec![0],
        cap: n.min(m),
    };
    search.expand(&full_set(cells));
    let pairs = search.best.iter().map(|&v| (v / m, v % m)).collect();
    (pairs, !search.budget.exhausted(), search.budget.used())
}

struct CliqueSearch<'a> {
    adj: &'a [FixedBitSet],
    n_cols: usize,
    budget: Budget,
    clique: Vec<usize>,
    best: Vec<usize>,
    cap: usize,
}

impl CliqueSearch<'_> {
    /// Bound on how many more cells from `cand` can join: one per distinct
    /// row and one per distinct column.
    fn room(&self, cand: &FixedBitSet) -> usize {
        let mut rows = 0usize;
        let mut last_row = usize::MAX;
        let mut cols = FixedBitSet::with_capacity(self.n_cols);
        for v in cand.ones() {
            let row = v / self.n_cols;
            if row != last_row {
                rows += 1;
                last_row = row;
            }
            cols.insert(v % self.n_cols);
        }
        rows.min(cols.count_ones(..))
    }

    fn expand(&mut self, cand: &FixedBitSet) -> bool {
        let mut rest = cand.clone();
        for v in cand.ones() {
            if self.clique.len() + self.room(&rest) <= self.best.len() {
                return false;
            }
            if !self.budget.tick() {
                return true;
            }
            rest.set(v, false);
            let mut next = rest.clone();
            next.intersect_with(&self.adj[v]);
            self.clique.push(v);
            if self.clique.len() > self.best.len() {
                self.best = self.clique.clone();
            }
            let stop = self.best.len() >= self.cap || (!next.is_clear() && self.expand(&next));
            self.clique.pop();
            if stop {
                return true;
            }
        }
        false
    }
}

fn split_search(t: &EvalTable, eps: f64, node_budget: u64) -> (Vec<(usize, usize)>, bool, u64) {
    let mut search = SplitSearch {
        t,
        eps,
        budget: Budget::new(node_budget),
        pairs: Vec::new(),
        best: vec![(0, 0)],
        cap: t.n_rows().min(t.n_cols()),
    };
    search.extend(&full_set(t.n_rows()), &full_set(t.n_cols()));
    (search.best, !search.budget.exhausted(), search.budget.used())
}

struct SplitSearch<'a> {
    t: &'a EvalTable,
    eps: f64,
    budget: Budget,
    pairs: Vec<(usize, usize)>,
    best: Vec<(usize, usize)>,
    cap: usize,
}

impl SplitSearch<'_> {
    /// `cols`: unused columns that every already-placed middle row separates
    /// from all columns placed before it. A row placed now constrains only
    /// columns placed after it.
    fn extend(&mut self, rows: &FixedBitSet, cols: &FixedBitSet) -> bool {
        let depth = self.pairs.len();
        let room = rows.count_ones(..).min(cols.count_ones(..));
        if depth + room <= self.best.len() {
            return false;
        }
        for j in cols.ones() {
            let mut rest_cols = cols.clone();
            rest_cols.set(j, false);
            for i in rows.ones() {
                if !self.budget.tick() {
                    return true;
                }
                let mut next_rows = rows.clone();
                next_rows.set(i, false);
                let mut next_cols = rest_cols.clone();
                for c in rest_cols.ones() {
                    let v = self.t.get(i, c);
                    if self.pairs.iter().any(|&(_, prior)| (self.t.get(i, prior) - v).abs() < self.eps) {
                        next_cols.set(c, false);
                    }
                }
                self.pairs.push((i, j));
                if self.pairs.len() > self.best.len() {
                    self.best = self.pairs.clone();
                }
                let stop = self.best.len() >= self.cap || self.extend(&next_rows, &next_cols);
                self.pairs.pop();
                if stop {
                    return true;
                }
            }
        }
        false
    }
}

/// One row of the stability spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub length: usize,
    /// Largest `r - s` over entry-valued thresholds admitting a ladder of
    /// this length, with the thresholds that attain it.
    pub best_gap: Option<f64>,
    pub thresholds: Option<ThresholdPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub exact: bool,
}

/// For each ladder length `2..=max_len`, the widest threshold gap (over
/// pairs of distinct entry values) still admitting a ladder of that length.
pub fn stability_spectrum(t: &EvalTable, max_len: usize, node_budget: u64) -> Result<Spectrum, Error> {
    if max_len < 2 {
        return Err(Error::InvalidArgument("spectrum needs max_len >= 2"));
    }
    let values = t.distinct_values();
    // best[l] = (gap, s, r) for ladder length l
    let mut best: Vec<Option<(f64, f64, f64)>> = vec![None; max_len + 1];
    let mut exact = true;
    for (a, &s) in values.iter().enumerate() {
        for &r in &values[a + 1..] {
            let th = ThresholdPair::new(s, r).expect("distinct sorted values");
            let found = ladder_search(t, th, node_budget, max_len);
            exact &= found.exact;
            if found.value < 2 {
                // raising r only shortens ladders
                break;
            }
            let gap = r - s;
            for slot in best.iter_mut().take(found.value.min(max_len) + 1).skip(2) {
                if slot.is_none_or(|(g, _, _)| gap > g) {
                    *slot = Some((gap, s, r));
                }
            }
        }
    }
    let entries = (2..=max_len)
        .map(|length| SpectrumEntry {
            length,
            best_gap: best[length].map(|b| b.0),
            thresholds: best[length].map(|(_, s, r)| ThresholdPair::new(s, r).expect("s < r")),
        })
        .collect();
    Ok(Spectrum { entries, exact })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IteratedMeans {
    pub below_mean: f64,
    pub above_mean: f64,
    pub defect: f64,
    /// Number of trailing positions used.
    pub tail: usize,
}

/// Tail means of `T[rows[k]][cols[l]]` below (`k > l`) and above (`k < l`)
/// the diagonal, over the last `ceil(tail_fraction * L)` positions (at
/// least two, so both sides are non-empty).
pub fn iterated_means(t: &EvalTable, rows: &[usize], cols: &[usize], tail_fraction: f64) -> Result<IteratedMeans, Error> {
    if rows.len() != cols.len() || rows.len() < 2 {
        return Err(Error::InvalidArgument("iterated means need equal-length sequences of length >= 2"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument("tail fraction must lie in (0, 1]"));
    }
    rows.iter().try_for_each(|&r| t.check_row(r))?;
    cols.iter().try_for_each(|&c| t.check_col(c))?;
    let len = rows.len();
    let tail = (libm::ceil(tail_fraction * len as f64) as usize).clamp(2, len);
    let start = len - tail;
    let (mut below, mut above) = (0.0, 0.0);
    for k in start..len {
        for l in start..len {
            let v = t.get(rows[k], cols[l]);
            if k > l {
                below += v;
            } else if k < l {
                above += v;
            }
        }
    }
    let pairs = (tail * (tail - 1) / 2) as f64;
    let (below_mean, above_mean) = (below / pairs, above / pairs);
    Ok(IteratedMeans { below_mean, above_mean, defect: (below_mean - above_mean).abs(), tail })
}
