//! One-call classification: every detector, re-validated witnesses,
//! converter outputs and parameterized verdict flags in a single report.
//!
//! The verdicts are finite claims at the caller's cutoffs. `ip_detected`
//! means a primal `(s, r)`-shattered column set of size `>= min_ip_dim` was
//! found; it never asserts NIP when false, only that the search (exact or
//! not, see the flag) found nothing that large.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ip::{ip_to_ladder, shattering_dimension};
use crate::op::{alternation_rank, max_ladder};
use crate::search::DEFAULT_NODE_BUDGET;
use crate::sop::{sop_to_alternation, sop_witness, strict_chain};
use crate::table::{Epsilon, EvalTable, ThresholdPair};
use crate::talagrand::{almost_nip_scan, AlmostNipScan, CountMode, DEFAULT_TUPLE_BUDGET};
use crate::witness::{
    validate_witness, AltVariant, AlternationWitness, ChainWitness, LadderWitness, ShatterWitness, StepChainWitness,
    Verdict, Witness,
};

pub const REPORT_SCHEMA: &str = "dl-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationParams {
    #[serde(flatten)]
    pub thresholds: ThresholdPair,
    pub eps: Epsilon,
    /// Ladder length at which `op_detected` is set.
    pub min_ladder: usize,
    /// Primal shattering dimension at which `ip_detected` is set.
    pub min_ip_dim: usize,
    /// Strict chain length at which `sop_detected` is set; also the target
    /// length of the literal chain search.
    pub min_chain: usize,
    /// Node budget of each exhaustive search.
    pub exact_limit: u64,
    pub k_max: usize,
    pub distinct_coords: bool,
    pub talagrand_mode: CountMode,
    pub tuple_budget: u64,
}

impl Default for ClassificationParams {
    fn default() -> Self {
        ClassificationParams {
            thresholds: ThresholdPair::new(0.0, 1.0).expect("0 < 1"),
            eps: Epsilon::new(1.0).expect("positive"),
            min_ladder: 4,
            min_ip_dim: 2,
            min_chain: 3,
            exact_limit: DEFAULT_NODE_BUDGET,
            k_max: 3,
            distinct_coords: true,
            talagrand_mode: CountMode::Exact,
            tuple_budget: DEFAULT_TUPLE_BUDGET,
        }
    }
}

/// A component failure, kept in the report in place of its result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentError {
    pub code: String,
    pub message: String,
    pub budget: bool,
}

impl From<Error> for ComponentError {
    fn from(e: Error) -> Self {
        ComponentError { code: e.code().to_string(), message: e.to_string(), budget: e.is_budget() }
    }
}

/// Either a component's result or the error that replaced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section<T> {
    Ok(T),
    Error(ComponentError),
}

impl<T> Section<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Section::Ok(v) => Some(v),
            Section::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<&ComponentError> {
        match self {
            Section::Ok(_) => None,
            Section::Error(e) => Some(e),
        }
    }

    fn from_result(r: Result<T, Error>) -> Self {
        match r {
            Ok(v) => Section::Ok(v),
            Err(e) => Section::Error(e.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub length: usize,
    pub exact: bool,
    pub nodes: u64,
    pub witness: LadderWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternationResult {
    pub rank: usize,
    pub exact: bool,
    pub nodes: u64,
    pub witness: AlternationWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternations {
    pub ii: Section<AlternationResult>,
    pub iii: Section<AlternationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterResult {
    pub dim: usize,
    pub exact: bool,
    pub nodes: u64,
    pub witness: Option<ShatterWitness>,
}

/// Primal: column sets shattered by rows. Dual: the same on the transpose,
/// so dual witness indices refer to `transpose(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shattering {
    pub primal: Section<ShatterResult>,
    pub dual: Section<ShatterResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub length: usize,
    pub exact: bool,
    pub witness: StepChainWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SopLiteral {
    pub target_m: usize,
    pub witness: Option<ChainWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Converters {
    /// Ladder from the primal shatter witness; length equals its dimension.
    pub ip_to_ladder: Option<Section<LadderWitness>>,
    /// Variant-ii alternation from the literal chain; length equals its length.
    pub sop_to_alternation: Option<Section<AlternationWitness>>,
}

/// What a flag was decided from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    /// `None` when the component failed.
    pub value: Option<usize>,
    pub cutoff: usize,
    pub exact: bool,
}

impl Trigger {
    pub fn detected(&self) -> bool {
        self.value.is_some_and(|v| v >= self.cutoff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub op_detected: bool,
    pub ip_detected: bool,
    pub sop_detected: bool,
    /// Ladder length vs `min_ladder`.
    pub op: Trigger,
    /// Primal shattering dimension vs `min_ip_dim`.
    pub ip: Trigger,
    /// Strict chain length vs `min_chain`.
    pub sop: Trigger,
}

impl Verdicts {
    fn new(op: Trigger, ip: Trigger, sop: Trigger) -> Self {
        Verdicts { op_detected: op.detected(), ip_detected: ip.detected(), sop_detected: sop.detected(), op, ip, sop }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema: String,
    pub params: ClassificationParams,
    pub n_rows: usize,
    pub n_cols: usize,
    pub ladder: Section<LadderResult>,
    pub alternation: Alternations,
    pub shattering: Shattering,
    pub strict_chain: Section<ChainResult>,
    pub sop_literal: Section<SopLiteral>,
    pub talagrand: Section<AlmostNipScan>,
    pub converters: Converters,
    pub verdict: Verdicts,
}

/// Re-validates `w` and turns a failure into an error.
fn checked<T>(t: &EvalTable, value: T, w: Option<Witness>) -> Result<T, Error> {
    if let Some(w) = w {
        validate_witness(t, &w)?.into_result()?;
    }
    Ok(value)
}

pub fn ladder_section(t: &EvalTable, p: &ClassificationParams) -> Section<LadderResult> {
    let f = max_ladder(t, p.thresholds, p.exact_limit);
    let w = Witness::Ladder(f.witness.clone());
    Section::from_result(checked(t, LadderResult { length: f.value, exact: f.exact, nodes: f.nodes, witness: f.witness }, Some(w)))
}

pub fn alternation_section(t: &EvalTable, p: &ClassificationParams, variant: AltVariant) -> Section<AlternationResult> {
    let f = alternation_rank(t, p.eps, variant, p.exact_limit);
    let w = Witness::Alternation(f.witness.clone());
    let result = AlternationResult { rank: f.value, exact: f.exact, nodes: f.nodes, witness: f.witness };
    Section::from_result(checked(t, result, Some(w)))
}

/// Shattering dimension of `t` itself; pass the transpose for the dual.
pub fn shatter_section(t: &EvalTable, p: &ClassificationParams) -> Section<ShatterResult> {
    let f = shattering_dimension(t, p.thresholds, p.exact_limit);
    let w = f.witness.clone().map(Witness::Shatter);
    Section::from_result(checked(t, ShatterResult { dim: f.value, exact: f.exact, nodes: f.nodes, witness: f.witness }, w))
}

pub fn chain_section(t: &EvalTable, p: &ClassificationParams) -> Section<ChainResult> {
    let f = strict_chain(t, p.eps);
    let w = Witness::StepChain(f.witness.clone());
    Section::from_result(checked(t, ChainResult { length: f.value, exact: f.exact, witness: f.witness }, Some(w)))
}

/// Literal chain search at length `max(min_chain, 2)`.
pub fn sop_literal_section(t: &EvalTable, p: &ClassificationParams) -> Section<SopLiteral> {
    let target_m = p.min_chain.max(2);
    Section::from_result(sop_witness(t, p.eps, target_m, p.exact_limit).and_then(|w| {
        let witness = w.clone().map(Witness::Chain);
        checked(t, SopLiteral { target_m, witness: w }, witness)
    }))
}

/// Talagrand scan over all rows.
pub fn talagrand_section(t: &EvalTable, p: &ClassificationParams) -> Section<AlmostNipScan> {
    let all: Vec<usize> = (0..t.n_rows()).collect();
    Section::from_result(almost_nip_scan(t, &all, p.thresholds, p.k_max, p.distinct_coords, p.talagrand_mode, p.tuple_budget))
}

/// Component results, computed in any order (or concurrently) and then
/// combined by [`assemble`].
#[derive(Debug, Clone)]
pub struct Components {
    pub ladder: Section<LadderResult>,
    pub alternation_ii: Section<AlternationResult>,
    pub alternation_iii: Section<AlternationResult>,
    pub primal: Section<ShatterResult>,
    pub dual: Section<ShatterResult>,
    pub strict_chain: Section<ChainResult>,
    pub sop_literal: Section<SopLiteral>,
    pub talagrand: Section<AlmostNipScan>,
}

impl Components {
    /// Runs every component sequentially.
    pub fn compute(t: &EvalTable, p: &ClassificationParams) -> Self {
        Components {
            ladder: ladder_section(t, p),
            alternation_ii: alternation_section(t, p, AltVariant::Swap),
            alternation_iii: alternation_section(t, p, AltVariant::Split),
            primal: shatter_section(t, p),
            dual: shatter_section(&t.transpose(), p),
            strict_chain: chain_section(t, p),
            sop_literal: sop_literal_section(t, p),
            talagrand: talagrand_section(t, p),
        }
    }
}

/// Builds the report: converter outputs and verdict flags are derived here.
pub fn assemble(t: &EvalTable, params: &ClassificationParams, c: Components) -> ClassificationReport {
    let ip_to_ladder = c.primal.ok().and_then(|s| s.witness.as_ref()).map(|w| {
        Section::from_result(ip_to_ladder(t, w).and_then(|l| {
            if l.len() == w.dim() {
                checked(t, l.clone(), Some(Witness::Ladder(l)))
            } else {
                Err(Error::InvalidArgument("converted ladder length differs from the shatter dimension"))
            }
        }))
    });
    let sop_to_alternation = c.sop_literal.ok().and_then(|s| s.witness.as_ref()).map(|w| {
        Section::from_result(sop_to_alternation(t, w).and_then(|a| {
            if a.len() == w.len() {
                checked(t, a.clone(), Some(Witness::Alternation(a)))
            } else {
                Err(Error::InvalidArgument("converted alternation length differs from the chain length"))
            }
        }))
    });

    let trigger = |value: Option<(usize, bool)>, cutoff| Trigger {
        value: value.map(|v| v.0),
        cutoff,
        exact: value.is_some_and(|v| v.1),
    };
    let verdict = Verdicts::new(
        trigger(c.ladder.ok().map(|l| (l.length, l.exact)), params.min_ladder),
        trigger(c.primal.ok().map(|s| (s.dim, s.exact)), params.min_ip_dim),
        trigger(c.strict_chain.ok().map(|s| (s.length, s.exact)), params.min_chain),
    );

    ClassificationReport {
        schema: REPORT_SCHEMA.to_string(),
        params: params.clone(),
        n_rows: t.n_rows(),
        n_cols: t.n_cols(),
        ladder: c.ladder,
        alternation: Alternations { ii: c.alternation_ii, iii: c.alternation_iii },
        shattering: Shattering { primal: c.primal, dual: c.dual },
        strict_chain: c.strict_chain,
        sop_literal: c.sop_literal,
        talagrand: c.talagrand,
        converters: Converters { ip_to_ladder, sop_to_alternation },
        verdict,
    }
}

pub fn classify(t: &EvalTable, params: &ClassificationParams) -> ClassificationReport {
    assemble(t, params, Components::compute(t, params))
}

/// Which table a report witness refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessTable {
    Input,
    Transpose,
}

impl ClassificationReport {
    /// Every witness embedded in the report, with its location.
    pub fn witnesses(&self) -> Vec<(&'static str, WitnessTable, Witness)> {
        let mut out = Vec::new();
        let input = WitnessTable::Input;
        if let Some(l) = self.ladder.ok() {
            out.push(("ladder", input, Witness::Ladder(l.witness.clone())));
        }
        for (name, s) in [("alternation.ii", &self.alternation.ii), ("alternation.iii", &self.alternation.iii)] {
            if let Some(a) = s.ok() {
                out.push((name, input, Witness::Alternation(a.witness.clone())));
            }
        }
        if let Some(w) = self.shattering.primal.ok().and_then(|s| s.witness.clone()) {
            out.push(("shattering.primal", input, Witness::Shatter(w)));
        }
        if let Some(w) = self.shattering.dual.ok().and_then(|s| s.witness.clone()) {
            out.push(("shattering.dual", WitnessTable::Transpose, Witness::Shatter(w)));
        }
        if let Some(c) = self.strict_chain.ok() {
            out.push(("strict_chain", input, Witness::StepChain(c.witness.clone())));
        }
        if let Some(w) = self.sop_literal.ok().and_then(|s| s.witness.clone()) {
            out.push(("sop_literal", input, Witness::Chain(w)));
        }
        if let Some(Section::Ok(l)) = &self.converters.ip_to_ladder {
            out.push(("converters.ip_to_ladder", input, Witness::Ladder(l.clone())));
        }
        if let Some(Section::Ok(a)) = &self.converters.sop_to_alternation {
            out.push(("converters.sop_to_alternation", input, Witness::Alternation(a.clone())));
        }
        out
    }

    /// Re-validates every embedded witness against `t` (or its transpose).
    pub fn revalidate(&self, t: &EvalTable) -> Result<Vec<(&'static str, Verdict)>, Error> {
        if (t.n_rows(), t.n_cols()) != (self.n_rows, self.n_cols) {
            return Err(Error::InvalidArgument("report shape does not match the table"));
        }
        let dual = t.transpose();
        self.witnesses()
            .into_iter()
            .map(|(name, on, w)| {
                let table = if on == WitnessTable::Input { t } else { &dual };
                validate_witness(table, &w).map(|v| (name, v))
            })
            .collect()
    }

    /// Component errors, by section name.
    pub fn errors(&self) -> Vec<(&'static str, &ComponentError)> {
        let sections: [(&'static str, Option<&ComponentError>); 10] = [
            ("ladder", self.ladder.error()),
            ("alternation.ii", self.alternation.ii.error()),
            ("alternation.iii", self.alternation.iii.error()),
            ("shattering.primal", self.shattering.primal.error()),
            ("shattering.dual", self.shattering.dual.error()),
            ("strict_chain", self.strict_chain.error()),
            ("sop_literal", self.sop_literal.error()),
            ("talagrand", self.talagrand.error()),
            ("converters.ip_to_ladder", self.converters.ip_to_ladder.as_ref().and_then(Section::error)),
            ("converters.sop_to_alternation", self.converters.sop_to_alternation.as_ref().and_then(Section::error)),
        ];
        sections.into_iter().filter_map(|(name, e)| e.map(|e| (name, e))).collect()
    }
}
