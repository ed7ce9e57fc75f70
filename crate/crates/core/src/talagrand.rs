//! Talagrand-stability diagnostics under the uniform measure on rows.
//!
//! `D_k(E, s, r)` is the set of `2k`-tuples `w` of rows from `E` for which
//! some column `f` alternates: `f(w_{2i}) <= s` and `f(w_{2i+1}) >= r` for
//! every `i < k`. With the uniform probability on the `n` rows,
//! `mu^{2k}(D_k) < (mu E)^{2k}` is the same as `|D_k| < |E|^{2k}`, so the
//! reports work with plain counts.
//!
//! With `distinct_coords` only tuples with pairwise distinct coordinates are
//! considered, and the reference count becomes the number of such tuples.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::search::{derive_seed, full_set, vec_of_sets};
use crate::table::{EvalTable, ThresholdPair};
use crate::witness::MAX_SHATTER_COLS;

/// Default cap on the number of tuples an exact count may range over.
pub const DEFAULT_TUPLE_BUDGET: u64 = 100_000_000;

/// Samples drawn per seeded task in Monte Carlo mode.
const MC_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CountMode {
    Exact,
    #[serde(rename = "mc")]
    MonteCarlo { seed: u64, samples: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DkReport {
    pub k: usize,
    #[serde(flatten)]
    pub thresholds: ThresholdPair,
    pub subset_e: Vec<usize>,
    pub n_rows: usize,
    /// Exact count, or the Monte Carlo estimate.
    pub count: f64,
    /// Zero in exact mode.
    pub std_error: f64,
    /// Admissible tuples: `|E|^{2k}`, or the number of distinct-coordinate
    /// tuples when `distinct_coords` is set.
    pub tuples: f64,
    /// `count / tuples` (0 when there are no admissible tuples).
    pub density: f64,
    /// `count / n^{2k}`, the uniform product measure of `D_k`.
    pub measure: f64,
    /// `(|E| / n)^{2k}`.
    pub threshold_value: f64,
    /// `count < tuples`.
    pub condition_holds: bool,
    pub distinct_coords: bool,
    #[serde(flatten)]
    pub mode: CountMode,
}

/// Validated row subset.
fn check_subset(t: &EvalTable, subset: &[usize]) -> Result<(), Error> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    subset.iter().try_for_each(|&p| t.check_row(p))?;
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("row subset must not repeat a row"));
    }
    Ok(())
}

/// Number of length-`len` tuples over `size` elements, with or without
/// repetition, as an exact integer when it fits.
fn tuple_count(size: usize, len: usize, distinct: bool) -> Option<u128> {
    (0..len).try_fold(1u128, |acc, i| {
        let factor = if distinct { size.checked_sub(i)? } else { size };
        acc.checked_mul(factor as u128)
    })
}

fn tuple_count_f64(size: usize, len: usize, distinct: bool) -> f64 {
    (0..len).map(|i| if distinct { size.saturating_sub(i) as f64 } else { size as f64 }).product()
}

/// Column masks per row: which columns are low / high at that row.
struct RowMasks {
    low: Vec<FixedBitSet>,
    high: Vec<FixedBitSet>,
}

impl RowMasks {
    fn new(t: &EvalTable, th: ThresholdPair, strict: bool) -> Self {
        let mut low = vec_of_sets(t.n_rows(), t.n_cols());
        let mut high = vec_of_sets(t.n_rows(), t.n_cols());
        for p in 0..t.n_rows() {
            for (c, &v) in t.row(p).iter().enumerate() {
                let (is_low, is_high) = if strict { (v < th.s(), v > th.r()) } else { (th.is_low(v), th.is_high(v)) };
                low[p].set(c, is_low);
                high[p].set(c, is_high);
            }
        }
        RowMasks { low, high }
    }

    /// Mask a coordinate at tuple position `pos` must intersect.
    fn at(&self, row: usize, pos: usize) -> &FixedBitSet {
        if pos % 2 == 0 {
            &self.low[row]
        } else {
            &self.high[row]
        }
    }
}

/// Counts (or estimates) `|D_k|` over tuples from `subset`.
pub fn dk_count(
    t: &EvalTable,
    subset: &[usize],
    k: usize,
    th: ThresholdPair,
    distinct_coords: bool,
    mode: CountMode,
    tuple_budget: u64,
) -> Result<DkReport, Error> {
    check_subset(t, subset)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1"));
    }
    let len = 2 * k;
    let masks = RowMasks::new(t, th, false);
    let tuples = tuple_count_f64(subset.len(), len, distinct_coords);
    let (count, std_error) = match mode {
        CountMode::Exact => {
            let full = tuple_count(subset.len(), len, false).unwrap_or(u128::MAX);
            if full > tuple_budget as u128 {
                return Err(Error::BudgetExceeded { required: full, budget: tuple_budget });
            }
            let count = if distinct_coords {
                count_distinct(&masks, subset, len, t.n_cols())
            } else {
                count_with_repeats(&masks, subset, len, t.n_cols())
            };
            (count as f64, 0.0)
        }
        CountMode::MonteCarlo { seed, samples } => {
            let hit = |w: &[usize]| {
                let mut alive = full_set(t.n_cols());
                w.iter().enumerate().all(|(pos, &row)| {
                    alive.intersect_with(masks.at(row, pos));
                    !alive.is_clear()
                })
            };
            estimate(subset, len, distinct_coords, seed, samples, tuples, hit)?
        }
    };
    let n = t.n_rows();
    let density = if tuples > 0.0 { count / tuples } else { 0.0 };
    Ok(DkReport {
        k,
        thresholds: th,
        subset_e: subset.to_vec(),
        n_rows: n,
        count,
        std_error,
        tuples,
        density,
        measure: count / libm::pow(n as f64, len as f64),
        threshold_value: libm::pow(subset.len() as f64 / n as f64, len as f64),
        condition_holds: count < tuples,
        distinct_coords,
        mode,
    })
}

/// Exact count with repeated coordinates allowed: the number of tuples
/// reaching a given set of still-alternating columns depends only on that
/// set, so prefixes are merged by it.
fn count_with_repeats(masks: &RowMasks, subset: &[usize], len: usize, n_cols: usize) -> u64 {
    let mut states: BTreeMap<Vec<usize>, (FixedBitSet, u64)> = BTreeMap::new();
    let start = full_set(n_cols);
    states.insert(start.as_slice().to_vec(), (start, 1));
    for pos in 0..len {
        // rows with identical masks at this parity act identically
        let mut classes: BTreeMap<Vec<usize>, (&FixedBitSet, u64)> = BTreeMap::new();
        for &row in subset {
            let m = masks.at(row, pos);
            classes.entry(m.as_slice().to_vec()).or_insert((m, 0)).1 += 1;
        }
        let mut next: BTreeMap<Vec<usize>, (FixedBitSet, u64)> = BTreeMap::new();
        for (set, count) in states.values() {
            for (mask, mult) in classes.values() {
                let mut alive = set.clone();
                alive.intersect_with(mask);
                if alive.is_clear() {
                    continue;
                }
                next.entry(alive.as_slice().to_vec()).or_insert_with(|| (alive, 0)).1 += count * mult;
            }
        }
        states = next;
    }
    states.values().map(|(_, c)| c).sum()
}

fn count_distinct(masks: &RowMasks, subset: &[usize], len: usize, n_cols: usize) -> u64 {
    fn go(masks: &RowMasks, subset: &[usize], used: &mut [bool], pos: usize, len: usize, alive: &FixedBitSet) -> u64 {
        if pos == len {
            return 1;
        }
        let mut total = 0;
        for (idx, &row) in subset.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let mut next = alive.clone();
            next.intersect_with(masks.at(row, pos));
            if next.is_clear() {
                continue;
            }
            used[idx] = true;
            total += go(masks, subset, used, pos + 1, len, &next);
            used[idx] = false;
        }
        total
    }
    let mut used = vec![false; subset.len()];
    go(masks, subset, &mut used, 0, len, &full_set(n_cols))
}

/// Seeded Monte Carlo estimate of `tuples * P(hit)`.
///
/// Samples are drawn in fixed-size tasks, task `i` seeded with
/// `derive_seed(seed, i)`, so the result does not depend on how tasks are
/// scheduled. Distinct-coordinate tuples are drawn by rejection.
fn estimate(
    subset: &[usize],
    len: usize,
    distinct: bool,
    seed: u64,
    samples: u64,
    tuples: f64,
    mut hit: impl FnMut(&[usize]) -> bool,
) -> Result<(f64, f64), Error> {
    if samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo mode needs at least one sample"));
    }
    if tuples == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut hits = 0u64;
    let mut tuple = vec![0usize; len];
    let tasks = samples.div_ceil(MC_CHUNK);
    for task in 0..tasks {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, task));
        let draws = MC_CHUNK.min(samples - task * MC_CHUNK);
        for _ in 0..draws {
            loop {
                for slot in tuple.iter_mut() {
                    *slot = subset[rng.random_range(0..subset.len())];
                }
                if !distinct || all_distinct(&tuple) {
                    break;
                }
            }
            if hit(&tuple) {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / samples as f64;
    let std_error = tuples * libm::sqrt(p * (1.0 - p) / samples as f64);
    Ok((tuples * p, std_error))
}

fn all_distinct(tuple: &[usize]) -> bool {
    tuple.iter().enumerate().all(|(i, a)| !tuple[..i].contains(a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostNipScan {
    /// Smallest `k <= k_max` with `count < tuples`.
    pub k_min: Option<usize>,
    pub reports: Vec<DkReport>,
}

/// Runs [`dk_count`] for `k = 1..=k_max`.
pub fn almost_nip_scan(
    t: &EvalTable,
    subset: &[usize],
    th: ThresholdPair,
    k_max: usize,
    distinct_coords: bool,
    mode: CountMode,
    tuple_budget: u64,
) -> Result<AlmostNipScan, Error> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1"));
    }
    let reports = (1..=k_max)
        .map(|k| dk_count(t, subset, k, th, distinct_coords, mode, tuple_budget))
        .collect::<Result<Vec<_>, _>>()?;
    let k_min = reports.iter().find(|r| r.condition_holds).map(|r| r.k);
    Ok(AlmostNipScan { k_min, reports })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TupleFraction {
    pub n: usize,
    /// Fraction of distinct-coordinate `n`-tuples whose rows are shattered.
    pub fraction: f64,
    pub std_error: f64,
    pub strict: bool,
    #[serde(flatten)]
    pub mode: CountMode,
}

/// Fraction of distinct-coordinate `n`-tuples from `subset` whose rows are
/// shattered by the columns: for every `I ⊆ {1..n}` some column is low on
/// `w_i, i ∈ I` and high elsewhere (`<`/`>` when `strict`, else `<=`/`>=`).
pub fn shattered_tuple_fraction(
    t: &EvalTable,
    subset: &[usize],
    n: usize,
    th: ThresholdPair,
    strict: bool,
    mode: CountMode,
    tuple_budget: u64,
) -> Result<TupleFraction, Error> {
    check_subset(t, subset)?;
    if n == 0 {
        return Err(Error::InvalidArgument("tuple length must be at least 1"));
    }
    if n > MAX_SHATTER_COLS {
        return Err(Error::TooManyColumns { k: n });
    }
    let masks = RowMasks::new(t, th, strict);
    let shattered = |rows: &[usize]| rows_shattered(&masks, rows, t.n_cols());
    let (fraction, std_error) = match mode {
        CountMode::Exact => {
            if n > subset.len() {
                (0.0, 0.0)
            } else {
                let sets = binomial(subset.len(), n).unwrap_or(u128::MAX);
                if sets > tuple_budget as u128 {
                    return Err(Error::BudgetExceeded { required: sets, budget: tuple_budget });
                }
                // shattering ignores order: count sets, every ordering of a set counts alike
                let mut chosen = Vec::with_capacity(n);
                let count = count_shattered_sets(subset, 0, n, &mut chosen, &shattered);
                (count as f64 / sets as f64, 0.0)
            }
        }
        CountMode::MonteCarlo { seed, samples } => {
            let tuples = tuple_count_f64(subset.len(), n, true);
            let (est, se) = estimate(subset, n, true, seed, samples, tuples, shattered)?;
            if tuples > 0.0 {
                (est / tuples, se / tuples)
            } else {
                (0.0, 0.0)
            }
        }
    };
    Ok(TupleFraction { n, fraction, std_error, strict, mode })
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    (0..k).try_fold(1u128, |acc, i| Some(acc.checked_mul((n - i) as u128)? / (i as u128 + 1)))
}

/// Counts `n`-subsets (in index order) whose rows are shattered; a prefix
/// that is not shattered has no shattered extension.
fn count_shattered_sets(
    subset: &[usize],
    from: usize,
    n: usize,
    chosen: &mut Vec<usize>,
    shattered: &impl Fn(&[usize]) -> bool,
) -> u64 {
    if chosen.len() == n {
        return 1;
    }
    let mut total = 0;
    for idx in from..subset.len() {
        if subset.len() - idx < n - chosen.len() {
            break;
        }
        chosen.push(subset[idx]);
        if shattered(chosen) {
            total += count_shattered_sets(subset, idx + 1, n, chosen, shattered);
        }
        chosen.pop();
    }
    total
}

fn rows_shattered(masks: &RowMasks, rows: &[usize], n_cols: usize) -> bool {
    let mut seen = FixedBitSet::with_capacity(1 << rows.len());
    for c in 0..n_cols {
        let mut pattern = 0usize;
        let decided = rows.iter().enumerate().all(|(i, &row)| {
            if masks.low[row].contains(c) {
                pattern |= 1 << i;
                true
            } else {
                masks.high[row].contains(c)
            }
        });
        if decided {
            seen.insert(pattern);
        }
    }
    seen.is_full()
}
