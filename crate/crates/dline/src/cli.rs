//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (including a failed witness
//! re-validation), 2 a component ran out of budget (the report is still
//! written, with the failure as a structured error entry), 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dline_core::classify::{ClassificationParams, ClassificationReport, Section};
use dline_core::definability::{mazur_approximate, sup_distance, ConvexApproximation};
use dline_core::generators::{GeneratorConfig, ValueModel};
use dline_core::talagrand::{almost_nip_scan, CountMode, DEFAULT_TUPLE_BUDGET};
use dline_core::{Epsilon, Error, EvalTable, ThresholdPair, DEFAULT_NODE_BUDGET};
use serde::Serialize;

use crate::formats::{load_table_file, load_vector, read_file, to_json, Format, LoadError};
use crate::scan::{classify_concurrent, dichotomy_scan, DEFAULT_EXCEPTION_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "dline", version, about = "Dividing-line analysis of finite evaluation tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a table and check its invariants.
    Validate(InputArgs),
    /// Run every detector and emit a dl-report/1 report.
    Analyze(AnalyzeArgs),
    /// Write a generated table.
    Generate(GenerateArgs),
    /// Talagrand D_k reports for k = 1..kmax over all rows.
    Talagrand(TalagrandArgs),
    /// Empirical dichotomy scan over seeded generated tables.
    DichotomyScan(ScanArgs),
    /// Best convex combination of columns approximating a target vector.
    Mazur(MazurArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the file extension (`.csv`, otherwise JSON).
    #[arg(long)]
    pub format: Option<Format>,
    /// CSV bound override (default: largest absolute entry).
    #[arg(long)]
    pub bound: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectorArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 4)]
    pub min_ladder: usize,
    #[arg(long, default_value_t = 2)]
    pub min_ip_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub min_chain: usize,
    #[arg(long, default_value_t = 3)]
    pub kmax: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub exact_limit: u64,
    #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
    pub tuple_budget: u64,
    /// Switches the Talagrand counts to seeded Monte Carlo.
    #[arg(long)]
    pub mc_samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub distinct_coords: bool,
}

impl DetectorArgs {
    fn mode(&self) -> CountMode {
        match self.mc_samples {
            Some(samples) => CountMode::MonteCarlo { seed: self.seed, samples },
            None => CountMode::Exact,
        }
    }

    fn params(&self) -> Result<ClassificationParams, Error> {
        Ok(ClassificationParams {
            thresholds: ThresholdPair::new(self.s, self.r)?,
            eps: Epsilon::new(self.eps)?,
            min_ladder: self.min_ladder,
            min_ip_dim: self.min_ip_dim,
            min_chain: self.min_chain,
            exact_limit: self.exact_limit,
            k_max: self.kmax,
            distinct_coords: self.distinct_coords,
            talagrand_mode: self.mode(),
            tuple_budget: self.tuple_budget,
        })
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub detectors: DetectorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Re-validate every witness in this report against the input table
    /// instead of running the detectors.
    #[arg(long)]
    pub validate_report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    HalfGraph,
    FullPattern,
    RandomTable,
    CantorExample,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Bernoulli,
    Uniform,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// half_graph size.
    #[arg(long)]
    pub n: Option<usize>,
    /// full_pattern column count.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, value_enum, default_value = "bernoulli")]
    pub model: Model,
    /// Bernoulli probability.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Uniform value bound.
    #[arg(long = "value-bound", default_value_t = 1.0)]
    pub value_bound: f64,
    /// Constant table value.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub value: f64,
    /// cantor_example column count.
    #[arg(long)]
    pub m: Option<usize>,
    /// cantor_example level count L.
    #[arg(long)]
    pub levels: Option<usize>,
}

fn need(v: Option<usize>, flag: &'static str) -> Result<usize, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this --kind")))
}

impl GeneratorArgs {
    fn config(&self, seed: u64) -> Result<GeneratorConfig, CliError> {
        Ok(match self.kind {
            Kind::HalfGraph => GeneratorConfig::HalfGraph { n: need(self.n, "n")? },
            Kind::FullPattern => GeneratorConfig::FullPattern { k: need(self.k, "k")? },
            Kind::RandomTable => GeneratorConfig::RandomTable {
                rows: need(self.rows, "rows")?,
                cols: need(self.cols, "cols")?,
                values: match self.model {
                    Model::Bernoulli => ValueModel::Bernoulli { p: self.p },
                    Model::Uniform => ValueModel::Uniform { bound: self.value_bound },
                },
                seed,
            },
            Kind::CantorExample => GeneratorConfig::CantorExample { m: need(self.m, "m")?, levels: need(self.levels, "levels")? },
            Kind::Constant => {
                GeneratorConfig::Constant { rows: need(self.rows, "rows")?, cols: need(self.cols, "cols")?, value: self.value }
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the designated target column (cantor_example) as a JSON array.
    #[arg(long)]
    pub target_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TalagrandArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 3)]
    pub kmax: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub distinct_coords: bool,
    #[arg(long)]
    pub mc_samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
    pub tuple_budget: u64,
    /// Row subset E, comma separated (default: all rows).
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<usize>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long)]
    pub trials: u64,
    #[command(flatten)]
    pub detectors: DetectorArgs,
    #[arg(long, default_value_t = DEFAULT_EXCEPTION_CAP)]
    pub exception_cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MazurArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long)]
    pub bound: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub cols: Vec<usize>,
    /// JSON array (or CSV) with one value per row.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Load(#[from] LoadError),
    #[error("{0}")]
    Core(Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_budget() => EXIT_BUDGET,
            _ => EXIT_INVALID,
        }
    }
}

/// Parameter errors on flags are usage errors; everything else is input.
fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Tool version, subcommand, parameter echo and seeds.
#[derive(Debug, Serialize)]
pub struct Provenance<P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: Option<String>,
    pub params: P,
}

#[derive(Debug, Serialize)]
struct Stamped<'a, P: Serialize, B: Serialize> {
    #[serde(flatten)]
    body: &'a B,
    provenance: Provenance<P>,
}

fn provenance<P: Serialize>(command: &'static str, input: Option<&Path>, params: P) -> Provenance<P> {
    Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        input: input.map(|p| p.display().to_string()),
        params,
    }
}

fn emit(out: &OutputArgs, json: String, text: impl FnOnce() -> String, stdout: &mut dyn Write) -> Result<(), CliError> {
    let body = match out.output {
        OutputFormat::Json => json,
        OutputFormat::Text => text(),
    };
    write_to(out.out.as_deref(), &body, stdout)
}

fn write_to(path: Option<&Path>, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|source| CliError::Write { path: p.display().to_string(), source }),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
    }
}

fn load(input: &InputArgs) -> Result<EvalTable, CliError> {
    Ok(load_table_file(&input.input, input.format, input.bound)?)
}

/// Parses `argv` (including the program name) and runs it. Reports go to
/// `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => validate(&a, stdout),
        Command::Analyze(a) => analyze(&a, stdout),
        Command::Generate(a) => generate(&a, stdout),
        Command::Talagrand(a) => talagrand(&a, stdout),
        Command::DichotomyScan(a) => scan(&a, stdout),
        Command::Mazur(a) => mazur(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn validate(a: &InputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let t = load(a)?;
    #[derive(Serialize)]
    struct Summary {
        valid: bool,
        n_rows: usize,
        n_cols: usize,
        bound: f64,
    }
    let s = Summary { valid: true, n_rows: t.n_rows(), n_cols: t.n_cols(), bound: t.bound() };
    write_to(None, &to_json(&s), stdout)?;
    Ok(EXIT_OK)
}

fn analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let params = a.detectors.params().map_err(usage)?;
    let t = load(&a.input)?;
    if let Some(report_path) = &a.validate_report {
        return revalidate(&t, report_path, &a.output, stdout);
    }
    let report = classify_concurrent(&t, &params);
    let stamped = Stamped { provenance: provenance("analyze", Some(&a.input.input), &params), body: &report };
    emit(&a.output, to_json(&stamped), || report_text(&report), stdout)?;
    let budget_hit = report.errors().iter().any(|(_, e)| e.budget);
    Ok(if budget_hit { EXIT_BUDGET } else { EXIT_OK })
}

fn report_text(r: &ClassificationReport) -> String {
    fn sec<T>(s: &Section<T>, f: impl Fn(&T) -> String) -> String {
        match s {
            Section::Ok(v) => f(v),
            Section::Error(e) => format!("error ({})", e.message),
        }
    }
    let exact = |e: bool| if e { "exact" } else { "lower bound" };
    let mut out = String::new();
    out.push_str(&format!("table {}x{}\n", r.n_rows, r.n_cols));
    out.push_str(&format!("ladder           {}\n", sec(&r.ladder, |l| format!("{} ({})", l.length, exact(l.exact)))));
    out.push_str(&format!("alternation ii   {}\n", sec(&r.alternation.ii, |a| format!("{} ({})", a.rank, exact(a.exact)))));
    out.push_str(&format!("alternation iii  {}\n", sec(&r.alternation.iii, |a| format!("{} ({})", a.rank, exact(a.exact)))));
    out.push_str(&format!("shatter primal   {}\n", sec(&r.shattering.primal, |s| format!("{} ({})", s.dim, exact(s.exact)))));
    out.push_str(&format!("shatter dual     {}\n", sec(&r.shattering.dual, |s| format!("{} ({})", s.dim, exact(s.exact)))));
    out.push_str(&format!("strict chain     {}\n", sec(&r.strict_chain, |c| c.length.to_string())));
    out.push_str(&format!(
        "literal chain    {}\n",
        sec(&r.sop_literal, |s| if s.witness.is_some() { format!("found at m={}", s.target_m) } else { format!("none at m={}", s.target_m) })
    ));
    out.push_str(&format!(
        "talagrand k_min  {}\n",
        sec(&r.talagrand, |s| s.k_min.map_or("none".to_string(), |k| k.to_string()))
    ));
    let v = &r.verdict;
    out.push_str(&format!("op_detected {}  ip_detected {}  sop_detected {}\n", v.op_detected, v.ip_detected, v.sop_detected));
    out
}

fn revalidate(t: &EvalTable, report_path: &Path, out: &OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let bytes = read_file(report_path)?;
    let report: ClassificationReport = serde_json::from_slice(&bytes).map_err(LoadError::Json)?;
    let verdicts = report.revalidate(t).map_err(CliError::Core)?;
    #[derive(Serialize)]
    struct Line {
        witness: &'static str,
        valid: bool,
        violation: Option<dline_core::Violation>,
    }
    let lines: Vec<Line> = verdicts
        .into_iter()
        .map(|(name, v)| Line { witness: name, valid: v.is_valid(), violation: v.violation().cloned() })
        .collect();
    let all_valid = lines.iter().all(|l| l.valid);
    #[derive(Serialize)]
    struct Revalidation {
        report: String,
        all_valid: bool,
        witnesses: Vec<Line>,
    }
    let body = Revalidation { report: report_path.display().to_string(), all_valid, witnesses: lines };
    let text = || {
        let mut s = String::new();
        for l in &body.witnesses {
            s.push_str(&format!("{:32} {}\n", l.witness, if l.valid { "valid" } else { "INVALID" }));
        }
        s
    };
    emit(out, to_json(&body), text, stdout)?;
    Ok(if all_valid { EXIT_OK } else { EXIT_INVALID })
}

fn generate(a: &GenerateArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let config = a.generator.config(a.seed)?;
    let generated = config.generate().map_err(usage)?;
    write_to(a.out.as_deref(), &to_json(&generated.table), stdout)?;
    if let Some(path) = &a.target_out {
        let target = generated
            .target
            .ok_or_else(|| CliError::Usage("--target-out needs a generator with a target column".into()))?;
        write_to(Some(path), &to_json(&target), stdout)?;
    }
    Ok(EXIT_OK)
}

fn talagrand(a: &TalagrandArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let th = ThresholdPair::new(a.s, a.r).map_err(usage)?;
    let t = load(&a.input)?;
    let rows: Vec<usize> = a.rows.clone().unwrap_or_else(|| (0..t.n_rows()).collect());
    let mode = match a.mc_samples {
        Some(samples) => CountMode::MonteCarlo { seed: a.seed, samples },
        None => CountMode::Exact,
    };
    let scan = almost_nip_scan(&t, &rows, th, a.kmax, a.distinct_coords, mode, a.tuple_budget).map_err(CliError::Core)?;
    #[derive(Serialize)]
    struct Params {
        s: f64,
        r: f64,
        kmax: usize,
        distinct_coords: bool,
        #[serde(flatten)]
        mode: CountMode,
        tuple_budget: u64,
        rows: Vec<usize>,
    }
    let params =
        Params { s: a.s, r: a.r, kmax: a.kmax, distinct_coords: a.distinct_coords, mode, tuple_budget: a.tuple_budget, rows };
    let stamped = Stamped { provenance: provenance("talagrand", Some(&a.input.input), params), body: &scan };
    let text = || {
        let mut s = format!("k_min {}\n", scan.k_min.map_or("none".to_string(), |k| k.to_string()));
        for r in &scan.reports {
            s.push_str(&format!("k={} count={} tuples={} density={} holds={}\n", r.k, r.count, r.tuples, r.density, r.condition_holds));
        }
        s
    };
    emit(&a.output, to_json(&stamped), text, stdout)?;
    Ok(EXIT_OK)
}

fn scan(a: &ScanArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let params = a.detectors.params().map_err(usage)?;
    let config = a.generator.config(0)?;
    // validate the config once before fanning out
    config.generate().map_err(usage)?;
    let summary = dichotomy_scan(&config, a.trials, a.detectors.seed, &params, a.exception_cap).map_err(CliError::Core)?;
    let stamped = Stamped { provenance: provenance("dichotomy-scan", None, &params), body: &summary };
    let text = || {
        format!(
            "trials {}\nladder >= {}: {}\nexplained: {} (ip {}, sop {})\nexceptions: {}\n",
            summary.trials,
            params.min_ladder,
            summary.long_ladder,
            summary.explained,
            summary.explained_by_ip,
            summary.explained_by_sop,
            summary.exceptions_total
        )
    };
    emit(&a.output, to_json(&stamped), text, stdout)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MazurOutput {
    #[serde(flatten)]
    approximation: ConvexApproximation,
    /// Sup distance of the uniform (Cesàro) weights over the same candidates.
    cesaro_baseline: f64,
}

fn mazur(a: &MazurArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if !(a.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let t = load_table_file(&a.table, a.format, a.bound)?;
    let target = load_vector(&a.target)?;
    let approximation = mazur_approximate(&t, &a.cols, &target, a.tol).map_err(CliError::Core)?;
    let uniform = vec![1.0 / a.cols.len() as f64; a.cols.len()];
    let cesaro_baseline = sup_distance(&t, &a.cols, &uniform, &target);
    let body = MazurOutput { approximation, cesaro_baseline };
    #[derive(Serialize)]
    struct Params<'a> {
        cols: &'a [usize],
        target: String,
        tol: f64,
    }
    let params = Params { cols: &a.cols, target: a.target.display().to_string(), tol: a.tol };
    let stamped = Stamped { provenance: provenance("mazur", Some(&a.table), params), body: &body };
    let text = || {
        format!(
            "achieved {}\ncertified_gap {}\ncesaro_baseline {}\nweights {:?}\n",
            body.approximation.achieved, body.approximation.certified_gap, body.cesaro_baseline, body.approximation.weights
        )
    };
    emit(&a.output, to_json(&stamped), text, stdout)?;
    Ok(EXIT_OK)
}
