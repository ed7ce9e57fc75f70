//! Independence-property detection: `(s, r)`-shattering of column sets by
//! rows, the shattering dimension, and the IP-to-ladder converter.
//!
//! Pattern realisation works on row bitsets. For each column `c`, `LOW_c`
//! holds the rows `<= s` and `HIGH_c` the rows `>= r`; rows strictly between
//! the thresholds belong to neither. A pattern `I` over columns `c_1..c_k` is
//! realised iff `⋂_{i∈I} LOW_{c_i} ∩ ⋂_{i∉I} HIGH_{c_i}` is non-empty.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;

use crate::error::Error;
use crate::search::{full_set, Budget, Found, ThresholdMasks};
use crate::table::{EvalTable, ThresholdPair};
use crate::witness::{LadderWitness, ShatterWitness, MAX_SHATTER_COLS};

/// Returns a shatter witness for `cols`, or `None` if some pattern has no
/// realising row. Each pattern selects its smallest realising row.
pub fn is_shattered(t: &EvalTable, cols: &[usize], th: ThresholdPair) -> Result<Option<ShatterWitness>, Error> {
    if cols.is_empty() {
        return Err(Error::EmptySelection);
    }
    if cols.len() > MAX_SHATTER_COLS {
        return Err(Error::TooManyColumns { k: cols.len() });
    }
    cols.iter().try_for_each(|&c| t.check_col(c))?;
    let mut sorted = cols.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("shattered column sets must not repeat a column"));
    }
    let masks = ThresholdMasks::new(t, th);
    Ok(realize(&masks, cols, t.n_rows()).map(|selector| ShatterWitness { cols: cols.to_vec(), thresholds: th, selector }))
}

fn realize(masks: &ThresholdMasks, cols: &[usize], n_rows: usize) -> Option<BTreeMap<u32, usize>> {
    fn go(masks: &ThresholdMasks, cols: &[usize], idx: usize, acc: &FixedBitSet, mask: u32, out: &mut BTreeMap<u32, usize>) -> bool {
        let Some(&c) = cols.get(idx) else {
            out.insert(mask, acc.minimum().expect("non-empty"));
            return true;
        };
        for (bit, set) in [(1u32, &masks.low_rows[c]), (0, &masks.high_rows[c])] {
            let mut next = acc.clone();
            next.intersect_with(set);
            if next.is_clear() || !go(masks, cols, idx + 1, &next, mask | bit << idx, out) {
                return false;
            }
        }
        true
    }
    let mut out = BTreeMap::new();
    go(masks, cols, 0, &full_set(n_rows), 0, &mut out).then_some(out)
}

/// Largest `k` such that some `k`-column set is `(s, r)`-shattered.
///
/// The search is level-wise: a `(k+1)`-set is only tested when all of its
/// `k`-subsets are shattered. A greedy pass runs first so that an exhausted
/// budget still yields a certified lower bound. The witness is the
/// lexicographically smallest shattered set of maximal size, or `None` when
/// no single column is shattered.
pub fn shattering_dimension(t: &EvalTable, th: ThresholdPair, node_budget: u64) -> Found<Option<ShatterWitness>> {
    let masks = ThresholdMasks::new(t, th);
    let n_rows = t.n_rows();
    let mut budget = Budget::new(node_budget);
    // 2^k patterns need 2^k distinct rows
    let cap = (usize::BITS - 1 - n_rows.leading_zeros()) as usize;
    let cap = cap.min(MAX_SHATTER_COLS).min(t.n_cols());

    let singles: Vec<usize> = (0..t.n_cols())
        .filter(|&c| !masks.low_rows[c].is_clear() && !masks.high_rows[c].is_clear())
        .collect();
    let witness_for = |cols: &[usize]| {
        realize(&masks, cols, n_rows).map(|selector| ShatterWitness { cols: cols.to_vec(), thresholds: th, selector })
    };
    if singles.is_empty() || cap == 0 {
        return Found { value: 0, witness: None, exact: true, nodes: 0 };
    }

    let mut greedy = alloc::vec![singles[0]];
    for &c in &singles[1..] {
        if greedy.len() >= cap || !budget.tick() {
            break;
        }
        greedy.push(c);
        if realize(&masks, &greedy, n_rows).is_none() {
            greedy.pop();
        }
    }

    let mut level: Vec<Vec<usize>> = singles.iter().map(|&c| alloc::vec![c]).collect();
    let mut exhausted = false;
    while level[0].len() < cap {
        let mut next = Vec::new();
        'sets: for set in &level {
            let last = *set.last().expect("non-empty set");
            for &c in singles.iter().filter(|&&c| c > last) {
                let mut cand = set.clone();
                cand.push(c);
                let mut sub = Vec::with_capacity(set.len());
                let all_subsets = (0..set.len()).all(|skip| {
                    sub.clear();
                    sub.extend(cand.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                    level.binary_search(&sub).is_ok()
                });
                if !all_subsets {
                    continue;
                }
                if !budget.tick() {
                    exhausted = true;
                    break 'sets;
                }
                if realize(&masks, &cand, n_rows).is_some() {
                    next.push(cand);
                }
            }
        }
        if exhausted || next.is_empty() {
            break;
        }
        level = next;
    }

    let best = if greedy.len() > level[0].len() { greedy } else { level.swap_remove(0) };
    Found { value: best.len(), witness: witness_for(&best), exact: !exhausted, nodes: budget.used() }
}

/// Converts a shatter witness over `c_1..c_k` into a ladder of length `k`.
///
/// Position `u` takes the row selected for the pattern whose low set is
/// `{u, ..., k}`: it is `>= r` on every earlier column and `<= s` on every
/// later one.
pub fn ip_to_ladder(t: &EvalTable, w: &ShatterWitness) -> Result<LadderWitness, Error> {
    w.validate(t)?.into_result()?;
    let k = w.cols.len() as u32;
    let all = (1u32 << k) - 1;
    let rows = (0..k)
        .map(|u| w.row_for(all & !((1u32 << u) - 1)).expect("validated selector is complete"))
        .collect();
    Ok(LadderWitness { rows, cols: w.cols.clone(), thresholds: w.thresholds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{constant, full_pattern, half_graph};
    use crate::search::DEFAULT_NODE_BUDGET;
    use alloc::vec;

    fn th01() -> ThresholdPair {
        ThresholdPair::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn full_pattern_is_shattered() {
        let t = full_pattern(3);
        let w = is_shattered(&t, &[0, 1, 2], th01()).unwrap().unwrap();
        // row b realises the pattern whose ones are the bits of b, i.e. low set = complement
        for mask in 0..8u32 {
            assert_eq!(w.row_for(mask), Some((!mask & 7) as usize));
        }
        assert!(w.validate(&t).unwrap().is_valid());
    }

    #[test]
    fn half_graph_pairs_are_not_shattered() {
        let t = half_graph(5);
        for a in 0..5 {
            for b in a + 1..5 {
                assert!(is_shattered(&t, &[a, b], th01()).unwrap().is_none());
            }
        }
    }

    #[test]
    fn single_column_with_both_sides() {
        let t = EvalTable::from_rows(vec![vec![0.2], vec![0.9], vec![0.5]], 1.0).unwrap();
        let th = ThresholdPair::new(0.3, 0.8).unwrap();
        let w = is_shattered(&t, &[0], th).unwrap().unwrap();
        assert_eq!(w.selector, BTreeMap::from([(0, 1), (1, 0)]));
    }

    #[test]
    fn argument_errors() {
        let t = full_pattern(2);
        assert!(matches!(is_shattered(&t, &[], th01()), Err(Error::EmptySelection)));
        assert!(matches!(is_shattered(&t, &[0, 0], th01()), Err(Error::InvalidArgument(_))));
        assert!(matches!(is_shattered(&t, &[7], th01()), Err(Error::IndexOutOfRange { .. })));
        let many: Vec<usize> = (0..25).collect();
        let wide = constant(2, 25, 0.0);
        assert!(matches!(is_shattered(&wide, &many, th01()), Err(Error::TooManyColumns { k: 25 })));
    }

    #[test]
    fn dimension_examples() {
        let fp = shattering_dimension(&full_pattern(3), th01(), DEFAULT_NODE_BUDGET);
        assert_eq!(fp.value, 3);
        assert!(fp.exact);
        assert_eq!(shattering_dimension(&half_graph(6), th01(), DEFAULT_NODE_BUDGET).value, 1);
        let c = shattering_dimension(&constant(4, 4, 0.0), th01(), DEFAULT_NODE_BUDGET);
        assert_eq!((c.value, c.witness), (0, None));
    }

    #[test]
    fn converter_examples() {
        for k in 1..=3 {
            let t = full_pattern(k);
            let cols: Vec<usize> = (0..k).collect();
            let w = is_shattered(&t, &cols, th01()).unwrap().unwrap();
            let ladder = ip_to_ladder(&t, &w).unwrap();
            assert_eq!(ladder.len(), k);
            assert!(ladder.validate(&t).unwrap().is_valid());
        }
        let t = full_pattern(2);
        let mut w = is_shattered(&t, &[0, 1], th01()).unwrap().unwrap();
        w.selector.insert(0, 0);
        assert!(matches!(ip_to_ladder(&t, &w), Err(Error::InvalidWitness(_))));
    }

    #[test]
    fn budget_exhaustion_keeps_greedy_bound() {
        let t = full_pattern(4);
        let found = shattering_dimension(&t, th01(), 2);
        assert!(!found.exact);
        assert!(found.value >= 1);
        assert!(found.witness.unwrap().validate(&t).unwrap().is_valid());
    }
}
