//! Node budgets and the bitset masks shared by the combinatorial searches.

use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::table::{EvalTable, ThresholdPair};

/// Default node budget for exhaustive searches.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Counts search nodes against a fixed limit.
#[derive(Debug, Clone)]
pub(crate) struct Budget {
    limit: u64,
    used: u64,
    exhausted: bool,
}

impl Budget {
    pub(crate) fn new(limit: u64) -> Self {
        Budget { limit, used: 0, exhausted: false }
    }

    /// Charges one node; returns `false` once the limit has been reached.
    #[inline]
    pub(crate) fn tick(&mut self) -> bool {
        if self.used >= self.limit {
            self.exhausted = true;
            return false;
        }
        self.used += 1;
        true
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub(crate) fn used(&self) -> u64 {
        self.used
    }
}

/// Result of a maximisation search: the best value found, its certificate,
/// and whether the search ran to completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Found<W> {
    pub value: usize,
    pub witness: W,
    /// `false` when the node budget ran out; `value` is then a certified
    /// lower bound.
    pub exact: bool,
    pub nodes: u64,
}

/// Per-axis threshold masks of a table.
pub(crate) struct ThresholdMasks {
    /// `low_rows[c]`: rows whose entry in column `c` is `<= s`.
    pub low_rows: Vec<FixedBitSet>,
    /// `high_rows[c]`: rows whose entry in column `c` is `>= r`.
    pub high_rows: Vec<FixedBitSet>,
    /// `low_cols[p]`: columns where row `p` is `<= s`.
    pub low_cols: Vec<FixedBitSet>,
}

impl ThresholdMasks {
    pub(crate) fn new(t: &EvalTable, th: ThresholdPair) -> Self {
        let (n, m) = (t.n_rows(), t.n_cols());
        let mut low_rows = vec_of_sets(m, n);
        let mut high_rows = vec_of_sets(m, n);
        let mut low_cols = vec_of_sets(n, m);
        for p in 0..n {
            for (c, &v) in t.row(p).iter().enumerate() {
                if th.is_low(v) {
                    low_rows[c].insert(p);
                    low_cols[p].insert(c);
                }
                if th.is_high(v) {
                    high_rows[c].insert(p);
                }
            }
        }
        ThresholdMasks { low_rows, high_rows, low_cols }
    }
}

pub(crate) fn vec_of_sets(count: usize, bits: usize) -> Vec<FixedBitSet> {
    (0..count).map(|_| FixedBitSet::with_capacity(bits)).collect()
}

pub(crate) fn full_set(bits: usize) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(bits);
    set.insert_range(..);
    set
}

/// Derives an independent stream seed from a base seed and a task index
/// (SplitMix64 finaliser over both inputs).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
