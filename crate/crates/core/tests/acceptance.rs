//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion that every criterion passed.
//!
//! Run with `cargo test -p dline-core --test acceptance -- --nocapture` to
//! see the lines.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use dline::formats::to_json;
use dline::scan::{dichotomy_scan, table_digest, DEFAULT_EXCEPTION_CAP};
use dline_core::classify::{classify, ClassificationParams};
use dline_core::definability::{mazur_approximate, sup_distance};
use dline_core::generators::{cantor_example, cantor_indicator, full_pattern, half_graph, random_table, GeneratorConfig, ValueModel};
use dline_core::ip::{ip_to_ladder, shattering_dimension};
use dline_core::op::{alternation_rank, max_ladder};
use dline_core::sop::{preorder_psi, sop_to_alternation, sop_witness, strict_chain};
use dline_core::talagrand::{almost_nip_scan, dk_count, shattered_tuple_fraction, CountMode};
use dline_core::{validate_witness, AltVariant, Epsilon, EvalTable, ThresholdPair, Witness, DEFAULT_NODE_BUDGET};

const BUDGET: u64 = DEFAULT_NODE_BUDGET;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn th01() -> ThresholdPair {
    ThresholdPair::new(0.0, 1.0).unwrap()
}

fn eps(v: f64) -> Epsilon {
    Epsilon::new(v).unwrap()
}

/// Pruned detectors against the oracles on one binary table.
fn binary_equivalence(t: &EvalTable) -> Result<(), String> {
    let pairs = [
        ("max_ladder", max_ladder(t, th01(), BUDGET).value, common::max_ladder(t, 0.0, 1.0)),
        ("shattering_dimension", shattering_dimension(t, th01(), BUDGET).value, common::shattering_dimension(t, 0.0, 1.0)),
        ("alternation ii", alternation_rank(t, eps(1.0), AltVariant::Swap, BUDGET).value, common::alternation_swap(t, 1.0)),
        ("alternation iii", alternation_rank(t, eps(1.0), AltVariant::Split, BUDGET).value, common::alternation_split(t, 1.0)),
        ("strict_chain", strict_chain(t, eps(1.0)).value, common::strict_chain(t, 1.0)),
    ];
    for (name, pruned, oracle) in pairs {
        ensure!(pruned == oracle, "{name}: pruned {pruned} vs oracle {oracle} on {:?}", t.entries());
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    for bits in 0..1u64 << 16 {
        binary_equivalence(&common::binary_table(4, 4, bits))?;
    }
    for seed in 0..500 {
        binary_equivalence(&random_table(5, 5, ValueModel::Bernoulli { p: 0.5 }, seed).unwrap())?;
    }
    Ok("65536 4x4 tables and 500 random 5x5 tables match the oracles on 5 detectors".into())
}

/// The 1000 tables of criteria 2 and 3 with their parameters.
fn soundness_corpus() -> Vec<(EvalTable, ClassificationParams)> {
    (0..1000u64)
        .map(|seed| {
            let rows = 2 + (dline_core::derive_seed(seed, 0) % 11) as usize;
            let cols = 2 + (dline_core::derive_seed(seed, 1) % 11) as usize;
            let binary = seed % 2 == 0;
            let (model, th, e) = if binary {
                (ValueModel::Bernoulli { p: 0.5 }, th01(), eps(1.0))
            } else {
                (ValueModel::Uniform { bound: 1.0 }, ThresholdPair::new(-0.25, 0.25).unwrap(), eps(0.5))
            };
            let t = random_table(rows, cols, model, seed).unwrap();
            let p = ClassificationParams {
                thresholds: th,
                eps: e,
                min_chain: 2 + (seed % 3) as usize,
                k_max: 1,
                ..Default::default()
            };
            (t, p)
        })
        .collect()
}

fn criterion_2(corpus: &[(EvalTable, ClassificationParams)]) -> Outcome {
    let mut checked = 0usize;
    for (i, (t, p)) in corpus.iter().enumerate() {
        let report = classify(t, p);
        ensure!(report.errors().is_empty(), "table {i}: component errors {:?}", report.errors());
        for (name, verdict) in report.revalidate(t).map_err(|e| e.to_string())? {
            ensure!(verdict.is_valid(), "table {i}: {name} witness invalid: {verdict:?}");
            checked += 1;
        }
    }
    Ok(format!("{checked} witnesses from {} reports all validate", corpus.len()))
}

fn criterion_3(corpus: &[(EvalTable, ClassificationParams)]) -> Outcome {
    let (mut shatter, mut chains) = (0usize, 0usize);
    for (i, (t, p)) in corpus.iter().enumerate() {
        let dual = t.transpose();
        for (table, th) in [(t, p.thresholds), (&dual, p.thresholds)] {
            if let Some(w) = shattering_dimension(table, th, p.exact_limit).witness {
                let ladder = ip_to_ladder(table, &w).map_err(|e| format!("table {i}: {e}"))?;
                ensure!(ladder.len() == w.dim(), "table {i}: ladder {} from dim {}", ladder.len(), w.dim());
                ensure!(validate_witness(table, &Witness::Ladder(ladder)).unwrap().is_valid(), "table {i}: converted ladder invalid");
                shatter += 1;
            }
        }
        for m in 2..=4 {
            if let Some(w) = sop_witness(t, p.eps, m, p.exact_limit).map_err(|e| format!("table {i}: {e}"))? {
                let alt = sop_to_alternation(t, &w).map_err(|e| format!("table {i}: {e}"))?;
                ensure!(alt.variant == AltVariant::Swap && alt.len() == m, "table {i}: alternation {} from chain {m}", alt.len());
                ensure!(alt.validate(t).unwrap().is_valid(), "table {i}: converted alternation invalid");
                chains += 1;
            }
        }
    }
    ensure!(shatter > 0 && chains > 0, "corpus produced {shatter} shatter and {chains} chain witnesses");
    Ok(format!("{shatter} shatter witnesses -> ladders, {chains} chains -> variant-ii alternations"))
}

/// `(n, ladder, strict chain at eps 1, shattering dim at (0,1))`, frozen from
/// the oracle.
const HALF_GRAPH_GOLDEN: [(usize, usize, usize, usize); 6] =
    [(3, 3, 3, 1), (4, 4, 4, 1), (5, 5, 5, 1), (6, 6, 6, 1), (7, 7, 7, 1), (8, 8, 8, 1)];

fn criterion_4() -> Outcome {
    for (n, ladder, chain, dim) in HALF_GRAPH_GOLDEN {
        let t = half_graph(n);
        let oracle = (common::max_ladder(&t, 0.0, 1.0), common::strict_chain(&t, 1.0), common::shattering_dimension(&t, 0.0, 1.0));
        ensure!(oracle == (ladder, chain, dim), "n={n}: oracle {oracle:?} vs frozen {:?}", (ladder, chain, dim));
        let pruned = (max_ladder(&t, th01(), BUDGET).value, strict_chain(&t, eps(1.0)).value, shattering_dimension(&t, th01(), BUDGET).value);
        ensure!(pruned == oracle, "n={n}: pruned {pruned:?} vs oracle {oracle:?}");
    }
    Ok("n=3..8: ladder n, strict chain n, dimension 1".into())
}

fn criterion_5() -> Outcome {
    let th = ThresholdPair::new(-0.2, 0.3).unwrap();
    for seed in 0..100u64 {
        let rows = 1 + (seed % 9) as usize;
        let t = random_table(rows, 1, ValueModel::Uniform { bound: 1.0 }, 7000 + seed).unwrap();
        let low = t.entries().iter().filter(|&&v| v <= -0.2).count() as f64;
        let high = t.entries().iter().filter(|&&v| v >= 0.3).count() as f64;
        let all: Vec<usize> = (0..rows).collect();
        for k in 1..=3 {
            let r = dk_count(&t, &all, k, th, false, CountMode::Exact, u64::MAX).map_err(|e| e.to_string())?;
            ensure!(r.count == (low * high).powi(k as i32), "seed {seed} k {k}: {} vs ({low}*{high})^{k}", r.count);
        }
    }
    let mut instances = 0;
    for seed in 0..200u64 {
        let rows = 2 + (seed % 6) as usize;
        let cols = 1 + (seed / 6 % 4) as usize;
        let t = random_table(rows, cols, ValueModel::Bernoulli { p: 0.5 }, 8000 + seed).unwrap();
        let all: Vec<usize> = (0..rows).collect();
        for distinct in [false, true] {
            let scan = almost_nip_scan(&t, &all, th01(), 4, distinct, CountMode::Exact, 100_000_000).map_err(|e| e.to_string())?;
            let densities: Vec<f64> = scan.reports.iter().filter(|r| r.tuples > 0.0).map(|r| r.density).collect();
            ensure!(densities.windows(2).all(|w| w[1] <= w[0]), "seed {seed} distinct {distinct}: densities {densities:?}");
            instances += 1;
        }
    }
    Ok(format!("closed form on 100 single-column tables (k<=3); density monotone on {instances} scans"))
}

fn criterion_6() -> Outcome {
    for bits in 0..1u64 << 16 {
        let t = common::binary_table(4, 4, bits);
        let dual = t.transpose();
        ensure!(dual.transpose() == t, "transpose not an involution on {bits}");
        let dim = shattering_dimension(&dual, th01(), BUDGET).value;
        let all: Vec<usize> = (0..4).collect();
        for n in 1..=4 {
            let f = shattered_tuple_fraction(&t, &all, n, th01(), false, CountMode::Exact, u64::MAX).map_err(|e| e.to_string())?;
            ensure!((f.fraction > 0.0) == (dim >= n), "table {bits} n {n}: fraction {} vs dual dim {dim}", f.fraction);
        }
    }
    let corpus = [
        half_graph(7),
        full_pattern(4),
        cantor_example(5, 8).unwrap().table,
        random_table(9, 4, ValueModel::Uniform { bound: 3.0 }, 11).unwrap(),
    ];
    for t in &corpus {
        ensure!(t.transpose().transpose() == *t, "transpose not an involution on a corpus table");
    }
    Ok("fraction(n) > 0 <=> dual dim >= n on all 65536 4x4 tables; transpose involutive".into())
}

/// Exact `x > 3^-n` test for `x = num / 3^levels`.
fn above_power(num: u64, levels: u32, n: u32) -> bool {
    num as u128 * 3u128.pow(n) > 3u128.pow(levels)
}

fn criterion_7() -> Outcome {
    let (m, levels) = (5, 8u32);
    let c = cantor_example(m, levels as usize).map_err(|e| e.to_string())?;
    let t = &c.table;
    ensure!(t.entries().iter().all(|&v| v == 0.0 || v == 1.0), "non-binary entry");
    let pre = preorder_psi(t);
    for a in 0..m {
        for b in a + 1..m {
            ensure!(pre.psi(a, b) > 0.0 && pre.psi(b, a) > 0.0, "columns {a}, {b} comparable");
        }
    }
    for e in [0.1, 0.5, 1.0] {
        ensure!(strict_chain(t, eps(e)).value == 1, "strict chain above 1 at eps {e}");
    }
    let dim = shattering_dimension(t, th01(), BUDGET);
    ensure!(dim.exact && dim.value <= 2, "dimension {} (exact {})", dim.value, dim.exact);

    // per row: compute N(x) from x directly, then f_n(x) = f(x) for n >= N(x)
    let two_thirds = 2 * 3u64.pow(levels - 1);
    for (p, &x) in c.numerators.iter().enumerate() {
        let limit = if x == 0 || x > two_thirds { 1.0 } else { 0.0 };
        ensure!(c.target[p] == limit, "row {p}: target {} vs {limit}", c.target[p]);
        let stable_from = if x == 0 {
            1
        } else if x <= two_thirds {
            (1..).find(|&n| above_power(x, levels, n)).unwrap()
        } else {
            // x - 2/3 >= 3^-(n+1)
            (1..).find(|&n| (x - two_thirds) as u128 * 3u128.pow(n + 1) >= 3u128.pow(levels)).unwrap()
        };
        for n in stable_from..stable_from + 30 {
            let fx = if cantor_indicator(x, levels as usize, n as usize) { 1.0 } else { 0.0 };
            ensure!(fx == limit, "row {p}: f_{n} = {fx} but limit {limit} (stable from {stable_from})");
        }
        for n in 1..=m {
            let fx = if cantor_indicator(x, levels as usize, n) { 1.0 } else { 0.0 };
            ensure!(t.get(p, n - 1) == fx, "row {p}: column {n} disagrees with f_{n}");
        }
    }
    Ok(format!("{} rows: pairwise incomparable, chain 1, dim {} <= 2, all rows stabilize to the target", t.n_rows(), dim.value))
}

fn criterion_8() -> Outcome {
    let tol = 1e-6;
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let rows = 3 + (seed % 6) as usize;
        let cols = 3 + (seed % 3) as usize;
        let raw = random_table(rows, cols, ValueModel::Uniform { bound: 1.0 }, 9000 + seed).unwrap();
        // entries in [0, 1]
        let entries = raw.entries().iter().map(|v| (v + 1.0) / 2.0).collect();
        let t = EvalTable::from_flat(rows, cols, entries, 1.0).unwrap();
        let target_table = random_table(rows, 1, ValueModel::Uniform { bound: 1.0 }, 9500 + seed).unwrap();
        let target: Vec<f64> = target_table.entries().iter().map(|v| (v + 1.0) / 2.0).collect();
        let k = 1 + (seed % 3) as usize;
        let cands: Vec<usize> = (0..k).map(|i| (i + seed as usize) % cols).collect();

        let approx = mazur_approximate(&t, &cands, &target, tol).map_err(|e| format!("seed {seed}: {e}"))?;
        let recomputed = common::sup_distance(&t, &cands, &approx.weights, &target);
        ensure!((recomputed - approx.achieved).abs() <= 1e-12, "seed {seed}: achieved {} vs recomputed {recomputed}", approx.achieved);
        let grid = common::mazur_grid(&t, &cands, &target, 1000);
        worst = worst.max((approx.achieved - grid).abs());
        ensure!((approx.achieved - grid).abs() <= 1e-3 + tol, "seed {seed}: achieved {} vs grid {grid}", approx.achieved);
        let uniform = vec![1.0 / k as f64; k];
        ensure!(approx.achieved <= sup_distance(&t, &cands, &uniform, &target), "seed {seed}: worse than the Cesaro weights");

        let member = t.column(cands[k - 1]);
        let exact = mazur_approximate(&t, &cands, &member, tol).map_err(|e| e.to_string())?;
        ensure!(exact.achieved == 0.0, "seed {seed}: exact member achieved {}", exact.achieved);
    }
    Ok(format!("50 instances: max |solver - grid| = {worst:.2e}, never worse than Cesaro, members at 0"))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dline").chain(args.iter().copied());
    let code = dline::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
}

fn scan_golden_path() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/scan_bernoulli_5x5_seed7.json"))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).display().to_string();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let (table, report) = (path(&format!("table{run}.json")), path("report.json"));
        let (code, msg) = run_cli(&["generate", "--kind", "random_table", "--rows", "8", "--cols", "8", "--seed", "42", "--out", &table]);
        ensure!(code == 0, "generate failed: {msg}");
        std::fs::copy(&table, path("table.json")).map_err(|e| e.to_string())?;
        let (code, msg) = run_cli(&["analyze", "--input", &path("table.json"), "--s", "0", "--r", "1", "--eps", "1", "--out", &report]);
        ensure!(code == 0, "analyze failed: {msg}");
        let (code, msg) = run_cli(&["analyze", "--input", &path("table.json"), "--validate-report", &report]);
        ensure!(code == 0 && msg.contains("\"all_valid\": true"), "validate-report failed: {msg}");
        outputs.push((std::fs::read(&table).unwrap(), std::fs::read(&report).unwrap()));
    }
    ensure!(outputs[0] == outputs[1], "generate/analyze outputs differ between runs");

    let gen = GeneratorConfig::RandomTable { rows: 5, cols: 5, values: ValueModel::Bernoulli { p: 0.5 }, seed: 0 };
    let params = ClassificationParams::default();
    let summary = dichotomy_scan(&gen, 100, 7, &params, DEFAULT_EXCEPTION_CAP).map_err(|e| e.to_string())?;
    let frozen = std::fs::read_to_string(scan_golden_path()).map_err(|e| format!("golden summary: {e}"))?;
    ensure!(to_json(&summary) == frozen, "scan summary differs from the frozen golden file");
    // the frozen per-trial values agree with the oracles
    for line in &summary.trial_lines {
        let t = gen.with_seed(line.seed).generate().unwrap().table;
        ensure!(table_digest(&t) == line.digest, "trial {}: digest mismatch", line.trial);
        let oracle = (common::max_ladder(&t, 0.0, 1.0), common::shattering_dimension(&t, 0.0, 1.0), common::strict_chain(&t, 1.0));
        ensure!((line.ladder, line.ip_dim, line.chain) == (Some(oracle.0), Some(oracle.1), Some(oracle.2)), "trial {}: oracle {oracle:?}", line.trial);
    }
    Ok(format!(
        "pipeline byte-identical; scan reproduces frozen summary ({} long ladders, {} explained, {} exceptions)",
        summary.long_ladder, summary.explained, summary.exceptions_total
    ))
}

#[test]
fn acceptance() {
    let corpus = soundness_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 oracle equivalence", Box::new(criterion_1)),
        ("2 witness soundness", Box::new(|| criterion_2(&corpus))),
        ("3 converter correctness", Box::new(|| criterion_3(&corpus))),
        ("4 half-graph golden profile", Box::new(criterion_4)),
        ("5 Talagrand closed form", Box::new(criterion_5)),
        ("6 duality cross-check", Box::new(criterion_6)),
        ("7 Cantor corpus", Box::new(criterion_7)),
        ("8 Mazur solver", Box::new(criterion_8)),
        ("9 determinism and pipeline", Box::new(criterion_9)),
    ];
    let mut failed = Vec::new();
    for (name, check) in &criteria {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
