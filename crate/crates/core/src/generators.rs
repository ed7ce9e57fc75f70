//! Deterministic table families with known dividing-line profiles.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::table::EvalTable;

/// Largest `k` accepted by [`full_pattern`].
pub const MAX_FULL_PATTERN: usize = 20;
/// Largest level count accepted by [`cantor_example`] (`2^L` rows).
pub const MAX_CANTOR_LEVELS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ValueModel {
    /// Entries are 1 with probability `p`, else 0; bound 1.
    Bernoulli { p: f64 },
    /// Entries uniform on `[-bound, bound]`.
    Uniform { bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorConfig {
    HalfGraph { n: usize },
    FullPattern { k: usize },
    RandomTable { rows: usize, cols: usize, #[serde(flatten)] values: ValueModel, seed: u64 },
    CantorExample { m: usize, levels: usize },
    Constant { rows: usize, cols: usize, value: f64 },
}

impl GeneratorConfig {
    /// The same config with its seed replaced (no-op for seedless kinds).
    pub fn with_seed(&self, seed: u64) -> GeneratorConfig {
        match self {
            GeneratorConfig::RandomTable { rows, cols, values, .. } => {
                GeneratorConfig::RandomTable { rows: *rows, cols: *cols, values: *values, seed }
            }
            other => other.clone(),
        }
    }

    pub fn generate(&self) -> Result<Generated, Error> {
        match *self {
            GeneratorConfig::HalfGraph { n } => {
                if n == 0 {
                    return Err(Error::InvalidSize("half_graph needs n >= 1"));
                }
                Ok(Generated { table: half_graph(n), target: None })
            }
            GeneratorConfig::FullPattern { k } => {
                if !(1..=MAX_FULL_PATTERN).contains(&k) {
                    return Err(Error::InvalidSize("full_pattern needs 1 <= k <= 20"));
                }
                Ok(Generated { table: full_pattern(k), target: None })
            }
            GeneratorConfig::RandomTable { rows, cols, values, seed } => {
                Ok(Generated { table: random_table(rows, cols, values, seed)?, target: None })
            }
            GeneratorConfig::CantorExample { m, levels } => {
                let c = cantor_example(m, levels)?;
                Ok(Generated { table: c.table, target: Some(c.target) })
            }
            GeneratorConfig::Constant { rows, cols, value } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::InvalidSize("constant needs positive sizes"));
                }
                if !value.is_finite() {
                    return Err(Error::InvalidArgument("constant value must be finite"));
                }
                Ok(Generated { table: constant(rows, cols, value), target: None })
            }
        }
    }
}

/// A generated table plus an optional designated target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub table: EvalTable,
    pub target: Option<Vec<f64>>,
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `T[i][j] = 1` iff `i < j`, bound 1.
///
/// # Panics
/// If `n == 0`.
pub fn half_graph(n: usize) -> EvalTable {
    let entries = (0..n * n).map(|idx| indicator(idx / n < idx % n)).collect();
    EvalTable::from_flat(n, n, entries, 1.0).expect("n >= 1")
}

/// `2^k x k` table whose row `b`, column `i` is bit `i` of `b`.
///
/// # Panics
/// If `k` is 0 or above [`MAX_FULL_PATTERN`].
pub fn full_pattern(k: usize) -> EvalTable {
    assert!((1..=MAX_FULL_PATTERN).contains(&k), "full_pattern needs 1 <= k <= 20");
    let rows = 1usize << k;
    let entries = (0..rows).flat_map(|b| (0..k).map(move |i| indicator(b >> i & 1 == 1))).collect();
    EvalTable::from_flat(rows, k, entries, 1.0).expect("k >= 1")
}

/// A table with every entry equal to `value` (bound `max(|value|, 1)`).
pub fn constant(n_rows: usize, n_cols: usize, value: f64) -> EvalTable {
    EvalTable::from_flat(n_rows, n_cols, alloc::vec![value; n_rows * n_cols], value.abs().max(1.0))
        .expect("positive sizes and finite value")
}

/// Seeded random table; the same arguments always give the same table.
pub fn random_table(n_rows: usize, n_cols: usize, values: ValueModel, seed: u64) -> Result<EvalTable, Error> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::InvalidSize("random_table needs positive sizes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = n_rows * n_cols;
    match values {
        ValueModel::Bernoulli { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument("bernoulli p must lie in [0, 1]"));
            }
            let entries = (0..len).map(|_| indicator(rng.random_bool(p))).collect();
            EvalTable::from_flat(n_rows, n_cols, entries, 1.0)
        }
        ValueModel::Uniform { bound } => {
            if !(bound.is_finite() && bound > 0.0) {
                return Err(Error::InvalidBound { bound });
            }
            let entries = (0..len).map(|_| rng.random_range(-bound..=bound)).collect();
            EvalTable::from_flat(n_rows, n_cols, entries, bound)
        }
    }
}

/// Level-`L` Cantor points, their clopen indicator columns and the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorCorpus {
    pub table: EvalTable,
    /// Indicator of `{0} ∪ (C ∩ (2/3, 1])` per row.
    pub target: Vec<f64>,
    /// Row `p` is the point `numerators[p] / 3^L`.
    pub numerators: Vec<u64>,
    pub levels: usize,
}

/// `3^e` as `u128`.
fn pow3(e: u32) -> u128 {
    3u128.pow(e)
}

/// Whether the level-`levels` Cantor point `numerator / 3^levels` lies in
/// `H_n = [0, 3^-n] ∪ [2/3 + 3^-(n+1), 1]`. Exact integer arithmetic; valid
/// for any `n >= 1`.
pub fn cantor_indicator(numerator: u64, levels: usize, n: usize) -> bool {
    let denom = pow3(levels as u32);
    let x = numerator as u128;
    // x <= 3^-n  <=>  x * 3^n <= 3^L
    let left = match x.checked_mul(3u128.checked_pow(n as u32).unwrap_or(u128::MAX)) {
        Some(scaled) => scaled <= denom,
        None => false,
    };
    // x - 2/3 >= 3^-(n+1)  <=>  (x - 2 * 3^(L-1)) * 3^(n+1) >= 3^L
    let two_thirds = 2 * pow3(levels as u32 - 1);
    let right = x > two_thirds
        && match (x - two_thirds).checked_mul(3u128.checked_pow(n as u32 + 1).unwrap_or(u128::MAX)) {
            Some(scaled) => scaled >= denom,
            None => true,
        };
    left || right
}

/// Cantor corpus with `m` clopen approximant columns over `2^levels` points.
///
/// Rows are sorted by increasing point; columns are `f_1..f_m` with
/// `f_n = 1_{H_n}`.
pub fn cantor_example(m: usize, levels: usize) -> Result<CantorCorpus, Error> {
    if m == 0 || levels > MAX_CANTOR_LEVELS || m + 2 > levels {
        return Err(Error::InvalidSize("cantor_example needs 1 <= m <= L - 2 and L <= 20"));
    }
    let n_points = 1usize << levels;
    let numerators: Vec<u64> = (0..n_points)
        .map(|b| {
            // digit i (1-based, most significant first) is 2 * bit (L - i) of b
            (1..=levels)
                .filter(|&i| b >> (levels - i) & 1 == 1)
                .map(|i| 2 * pow3((levels - i) as u32) as u64)
                .sum()
        })
        .collect();
    let mut entries = Vec::with_capacity(n_points * m);
    for &x in &numerators {
        entries.extend((1..=m).map(|n| indicator(cantor_indicator(x, levels, n))));
    }
    let two_thirds = 2 * pow3(levels as u32 - 1) as u64;
    let target = numerators.iter().map(|&x| indicator(x == 0 || x > two_thirds)).collect();
    let table = EvalTable::from_flat(n_points, m, entries, 1.0)?;
    Ok(CantorCorpus { table, target, numerators, levels })
}
