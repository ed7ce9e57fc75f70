//! Empirical dichotomy scan and concurrent classification.
//!
//! A scan generates `trials` tables from one generator config, trial `i`
//! seeded with `derive_seed(seed, i)`, classifies each, and tabulates how
//! many tables with long ladders are explained by a large shattered set or
//! a long strict chain. Tables that are not explained are exceptions and are
//! kept in full (up to a cap). Trials run in parallel but are merged by
//! index, so the summary does not depend on the worker count.

use dline_core::classify::{
    alternation_section, assemble, chain_section, ladder_section, shatter_section, sop_literal_section,
    talagrand_section, ClassificationParams, ClassificationReport, Components,
};
use dline_core::generators::GeneratorConfig;
use dline_core::{derive_seed, AltVariant, Error, EvalTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::to_compact_json;

pub const SCAN_SCHEMA: &str = "dl-scan/1";
pub const DEFAULT_EXCEPTION_CAP: usize = 25;

/// Runs the classification components concurrently; the report is the same
/// as `dline_core::classify::classify`.
pub fn classify_concurrent(t: &EvalTable, p: &ClassificationParams) -> ClassificationReport {
    let dual = t.transpose();
    let ((ladder, (alternation_ii, alternation_iii)), ((primal, dual), (strict_chain, (sop_literal, talagrand)))) = rayon::join(
        || {
            rayon::join(
                || ladder_section(t, p),
                || rayon::join(|| alternation_section(t, p, AltVariant::Swap), || alternation_section(t, p, AltVariant::Split)),
            )
        },
        || {
            rayon::join(
                || rayon::join(|| shatter_section(t, p), || shatter_section(&dual, p)),
                || rayon::join(|| chain_section(t, p), || rayon::join(|| sop_literal_section(t, p), || talagrand_section(t, p))),
            )
        },
    );
    let components =
        Components { ladder, alternation_ii, alternation_iii, primal, dual, strict_chain, sop_literal, talagrand };
    assemble(t, p, components)
}

/// SHA-256 of the table's compact canonical JSON, hex encoded.
pub fn table_digest(t: &EvalTable) -> String {
    hex::encode(Sha256::digest(to_compact_json(t).as_bytes()))
}

/// One line per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLine {
    pub trial: u64,
    pub seed: u64,
    pub digest: String,
    pub ladder: Option<usize>,
    pub ip_dim: Option<usize>,
    pub chain: Option<usize>,
    pub long_ladder: bool,
    pub ip: bool,
    pub sop: bool,
    pub exception: bool,
    /// All searches behind the three flags ran to completion.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanException {
    pub trial: u64,
    pub seed: u64,
    pub table: EvalTable,
    pub report: ClassificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub schema: String,
    pub generator: GeneratorConfig,
    pub trials: u64,
    pub seed: u64,
    pub params: ClassificationParams,
    /// Tables with ladder `>= min_ladder`.
    pub long_ladder: u64,
    /// Among those, tables with IP dim `>= min_ip_dim` or chain `>= min_chain`.
    pub explained: u64,
    pub explained_by_ip: u64,
    pub explained_by_sop: u64,
    pub exceptions_total: u64,
    pub exception_cap: usize,
    pub exceptions: Vec<ScanException>,
    pub trial_lines: Vec<TrialLine>,
}

/// Runs the scan. `trials = 0` gives an empty summary.
pub fn dichotomy_scan(
    gen: &GeneratorConfig,
    trials: u64,
    seed: u64,
    params: &ClassificationParams,
    exception_cap: usize,
) -> Result<ScanSummary, Error> {
    let results: Vec<(TrialLine, Option<(EvalTable, ClassificationReport)>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, trial);
            let table = gen.with_seed(trial_seed).generate()?.table;
            let report = dline_core::classify::classify(&table, params);
            let v = report.verdict;
            let line = TrialLine {
                trial,
                seed: trial_seed,
                digest: table_digest(&table),
                ladder: v.op.value,
                ip_dim: v.ip.value,
                chain: v.sop.value,
                long_ladder: v.op_detected,
                ip: v.ip_detected,
                sop: v.sop_detected,
                exception: v.op_detected && !v.ip_detected && !v.sop_detected,
                exact: v.op.exact && v.ip.exact && v.sop.exact,
            };
            let keep = line.exception.then_some((table, report));
            Ok((line, keep))
        })
        .collect::<Result<_, Error>>()?;

    let mut summary = ScanSummary {
        schema: SCAN_SCHEMA.to_string(),
        generator: gen.clone(),
        trials,
        seed,
        params: params.clone(),
        long_ladder: 0,
        explained: 0,
        explained_by_ip: 0,
        explained_by_sop: 0,
        exceptions_total: 0,
        exception_cap,
        exceptions: Vec::new(),
        trial_lines: Vec::with_capacity(results.len()),
    };
    for (line, kept) in results {
        if line.long_ladder {
            summary.long_ladder += 1;
            summary.explained += u64::from(line.ip || line.sop);
            summary.explained_by_ip += u64::from(line.ip);
            summary.explained_by_sop += u64::from(line.sop);
        }
        if let Some((table, report)) = kept {
            summary.exceptions_total += 1;
            if summary.exceptions.len() < exception_cap {
                summary.exceptions.push(ScanException { trial: line.trial, seed: line.seed, table, report });
            }
        }
        summary.trial_lines.push(line);
    }
    Ok(summary)
}
