//! Golden files. The values were produced once, cross-checked against the
//! oracles below, and frozen under `tests/golden/`. Regenerate with
//! `cargo test -p dline-core --test golden -- --ignored bless`.

mod common;

use std::path::PathBuf;

use dline::formats::to_json;
use dline::scan::{dichotomy_scan, table_digest, DEFAULT_EXCEPTION_CAP};
use dline_core::classify::{classify, ClassificationParams, ClassificationReport};
use dline_core::generators::{half_graph, random_table, GeneratorConfig, ValueModel};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn hg6_report() -> ClassificationReport {
    let p = ClassificationParams { min_ladder: 4, min_ip_dim: 2, min_chain: 3, ..Default::default() };
    classify(&half_graph(6), &p)
}

fn bipartite_report() -> ClassificationReport {
    classify(&random_table(16, 8, ValueModel::Bernoulli { p: 0.5 }, 1).unwrap(), &ClassificationParams::default())
}

fn scan_summary() -> String {
    let gen = GeneratorConfig::RandomTable { rows: 5, cols: 5, values: ValueModel::Bernoulli { p: 0.5 }, seed: 0 };
    to_json(&dichotomy_scan(&gen, 100, 7, &ClassificationParams::default(), DEFAULT_EXCEPTION_CAP).unwrap())
}

fn files() -> Vec<(&'static str, String)> {
    vec![
        ("classify_half_graph_6.json", to_json(&hg6_report())),
        ("classify_random_bipartite_16x8_seed1.json", to_json(&bipartite_report())),
        ("random_table_16x8_p05_seed1.sha256", table_digest(&random_table(16, 8, ValueModel::Bernoulli { p: 0.5 }, 1).unwrap()) + "\n"),
        ("scan_bernoulli_5x5_seed7.json", scan_summary()),
    ]
}

#[test]
#[ignore]
fn bless() {
    std::fs::create_dir_all(golden("")).unwrap();
    for (name, body) in files() {
        std::fs::write(golden(name), body).unwrap();
    }
}

#[test]
fn outputs_match_golden_files() {
    for (name, body) in files() {
        let frozen = std::fs::read_to_string(golden(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(body, frozen, "{name} changed");
    }
}

#[test]
fn golden_half_graph_report_agrees_with_oracles() {
    let t = half_graph(6);
    let r: ClassificationReport = load_report(&golden("classify_half_graph_6.json"));
    assert_eq!(r.verdict.op.value, Some(common::max_ladder(&t, 0.0, 1.0)));
    assert_eq!(r.verdict.ip.value, Some(common::shattering_dimension(&t, 0.0, 1.0)));
    assert_eq!(r.verdict.sop.value, Some(common::strict_chain(&t, 1.0)));
    assert_eq!((r.verdict.op.value, r.verdict.ip.value, r.verdict.sop.value), (Some(6), Some(1), Some(6)));
    assert!(r.verdict.op_detected && !r.verdict.ip_detected && r.verdict.sop_detected);
    assert!(r.revalidate(&t).unwrap().iter().all(|(_, v)| v.is_valid()));
}

#[test]
fn golden_bipartite_report_detects_ip() {
    let t = random_table(16, 8, ValueModel::Bernoulli { p: 0.5 }, 1).unwrap();
    let r: ClassificationReport = load_report(&golden("classify_random_bipartite_16x8_seed1.json"));
    let dim = r.verdict.ip.value.unwrap();
    assert!(r.verdict.ip_detected && dim >= 2);
    assert_eq!(dim, common::shattering_dimension(&t, 0.0, 1.0));
    assert!(r.revalidate(&t).unwrap().iter().all(|(_, v)| v.is_valid()));
}

fn load_report(path: &std::path::Path) -> ClassificationReport {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}
