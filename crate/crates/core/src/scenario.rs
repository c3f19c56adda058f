//! Declarative scenario files and the CSV tables they produce.
//!
//! A scenario is a TOML document with a `kind`, an optional `name`, `seed`
//! and `output` directory, and a `[params]` table specific to the kind:
//!
//! ```toml
//! kind = "contraction_sweep"
//! seed = 0
//! [params]
//! mu = 0.5
//! ts = [0.0, 0.5, 1.0]
//! family = { kind = "quadratic" }
//! friction = { kind = "dispersion", lambda = 8.0 }
//! ```
//!
//! Every table is fully computed before anything is written, so a failing
//! scenario leaves no files behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

use crate::attention::{reversal_region, reversal_threshold, use_threshold, EntropyUnit, Pipeline, RiScenario};
use crate::beliefs::{convex_order_compare, stop_loss, CxOrdering, PosteriorDist, PROB_TOL};
use crate::decide::{pipeline_compare, DecisionSpec};
use crate::learn::{
    contraction_sweep, solve_quadratic_closed_form, solve_two_point, FrictionSpec, LearningProblem, Solution, DEFAULT_GRID,
};
use crate::rlhf::{induced_quality_dist, lambda_sweep, tilt, Generator, RewardSpec};
use crate::risk::{
    check_dv, concavity_order, increment_second_differences, DvVerdict, FamilySpec, RiskSpec, DEFAULT_CURVATURE_GRID,
    DEFAULT_CURVATURE_TOL,
};
use crate::simplex::{
    cx_compare_k_report, random_contraction, random_simplex_dist, welfare_k, DecisionProblemK, SimplexDist,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const KINDS: [&str; 9] = [
    "solve_learning",
    "contraction_sweep",
    "compare_losses",
    "pipeline_compare",
    "ri_reversal",
    "rlhf_sweep",
    "goodhart_builtin",
    "diagnostics",
    "simplex_check",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown scenario kind `{0}` (expected one of: {list})", list = KINDS.join(", "))]
    UnknownKind(String),
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) | ScenarioError::UnknownKind(_) | ScenarioError::Validation { .. } => 2,
            ScenarioError::Invariant(_) => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

fn invalid(field: &str, e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Validation {
        field: field.to_string(),
        message: e.to_string(),
    }
}

// ---------------------------------------------------------------- tables

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// CSV text preceded by a `#` comment line naming scenario, version and seed.
    pub fn to_csv(&self, scenario: &str, seed: u64) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8");
        let mut out = String::new();
        let _ = writeln!(out, "# scenario={scenario} version={VERSION} seed={seed}");
        out.push_str(&body);
        out
    }
}

/// Tables produced by one run, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub name: String,
    pub seed: u64,
    pub tables: Vec<(String, Table)>,
}

impl RunOutput {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|(f, _)| f == file).map(|(_, t)| t)
    }

    pub fn render(&self) -> Vec<(String, String)> {
        self.tables
            .iter()
            .map(|(f, t)| (f.clone(), t.to_csv(&self.name, self.seed)))
            .collect()
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
        let rendered = self.render();
        fs::create_dir_all(dir).map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (file, text) in rendered {
            let path = dir.join(file);
            fs::write(&path, text).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

// ---------------------------------------------------------------- parameters

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethodSpec {
    #[default]
    TwoPoint,
    ClosedForm,
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_curvature_grid() -> usize {
    DEFAULT_CURVATURE_GRID
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveLearningParams {
    pub mu: f64,
    pub risk: RiskSpec,
    pub friction: FrictionSpec,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub method: SolveMethodSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionSweepParams {
    pub mu: f64,
    pub ts: Vec<f64>,
    pub family: FamilySpec,
    pub friction: FrictionSpec,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareLossesParams {
    pub a: RiskSpec,
    pub b: RiskSpec,
    #[serde(default = "default_curvature_grid")]
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineCompareParams {
    pub decision: DecisionSpec,
    pub q0: PosteriorDist,
    pub q1: PosteriorDist,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiReversalParams {
    pub decision: DecisionSpec,
    pub q0: PosteriorDist,
    pub q1: PosteriorDist,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub unit: EntropyUnit,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RlhfSweepParams {
    pub generator: Generator,
    pub reward: RewardSpec,
    #[serde(default)]
    pub w_eval: Option<Vec<f64>>,
    pub lambdas: Vec<f64>,
}

fn goodhart_lambdas() -> Vec<f64> {
    vec![1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 1e-4]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodhartParams {
    #[serde(default = "goodhart_lambdas")]
    pub lambdas: Vec<f64>,
}

impl Default for GoodhartParams {
    fn default() -> Self {
        Self {
            lambdas: goodhart_lambdas(),
        }
    }
}

fn default_k_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsParams {
    pub dists: Vec<PosteriorDist>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexPair {
    pub a: SimplexDist,
    pub b: SimplexDist,
}

fn default_k() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexCheckParams {
    #[serde(default)]
    pub pairs: Vec<SimplexPair>,
    /// Number of seeded random (law, garbling) pairs to add.
    #[serde(default)]
    pub random: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub decision: Option<DecisionProblemK>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    SolveLearning(SolveLearningParams),
    ContractionSweep(ContractionSweepParams),
    CompareLosses(CompareLossesParams),
    PipelineCompare(PipelineCompareParams),
    RiReversal(RiReversalParams),
    RlhfSweep(RlhfSweepParams),
    GoodhartBuiltin(GoodhartParams),
    Diagnostics(DiagnosticsParams),
    SimplexCheck(SimplexCheckParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub spec: ScenarioSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<P> {
    #[allow(dead_code)]
    kind: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    params: P,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionalEnvelope<P: Default> {
    #[allow(dead_code)]
    kind: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    params: P,
}

/// Best guess at the offending key: a backquoted name in the message, else
/// the key on the line the error points to.
fn error_field(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message();
    if let Some(start) = msg.find('`') {
        if let Some(len) = msg[start + 1..].find('`') {
            return msg[start + 1..start + 1 + len].to_string();
        }
    }
    if let Some(span) = e.span() {
        let line_start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
        let line = text[line_start..].lines().next().unwrap_or("");
        if let Some((key, _)) = line.split_once('=') {
            return key.trim().to_string();
        }
    }
    "params".to_string()
}

fn decode<P: DeserializeOwned>(text: &str) -> Result<(Option<String>, u64, Option<PathBuf>, P), ScenarioError> {
    toml::from_str::<Envelope<P>>(text)
        .map(|e| (e.name, e.seed, e.output, e.params))
        .map_err(|e| invalid(&error_field(text, &e), e.message()))
}

fn decode_optional<P: DeserializeOwned + Default>(
    text: &str,
) -> Result<(Option<String>, u64, Option<PathBuf>, P), ScenarioError> {
    toml::from_str::<OptionalEnvelope<P>>(text)
        .map(|e| (e.name, e.seed, e.output, e.params))
        .map_err(|e| invalid(&error_field(text, &e), e.message()))
}

/// Parses a scenario; `default_name` is used when the file has no `name`.
pub fn parse_scenario(text: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let kind = match table.get("kind") {
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(invalid("kind", "must be a string")),
        None => return Err(invalid("kind", "missing")),
    };
    macro_rules! parsed {
        ($variant:ident, $decoder:ident) => {{
            let (name, seed, output, params) = $decoder(text)?;
            (name, seed, output, ScenarioSpec::$variant(params))
        }};
    }
    let (name, seed, output, spec) = match kind.as_str() {
        "solve_learning" => parsed!(SolveLearning, decode),
        "contraction_sweep" => parsed!(ContractionSweep, decode),
        "compare_losses" => parsed!(CompareLosses, decode),
        "pipeline_compare" => parsed!(PipelineCompare, decode),
        "ri_reversal" => parsed!(RiReversal, decode),
        "rlhf_sweep" => parsed!(RlhfSweep, decode),
        "goodhart_builtin" => parsed!(GoodhartBuiltin, decode_optional),
        "diagnostics" => parsed!(Diagnostics, decode),
        "simplex_check" => parsed!(SimplexCheck, decode),
        other => return Err(ScenarioError::UnknownKind(other.to_string())),
    };
    let name = name.unwrap_or_else(|| default_name.to_string());
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(invalid("name", "must be a nonempty file stem"));
    }
    Ok(Scenario {
        name,
        seed,
        output,
        spec,
    })
}

// ---------------------------------------------------------------- builtins

pub struct Builtin {
    pub name: &'static str,
    pub about: &'static str,
    pub source: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "goodhart_builtin",
        about: "three-completion reward-hacking example, base mean 0.743 and a tilt sweep",
        source: r#"kind = "goodhart_builtin"
name = "goodhart_builtin"
"#,
    },
    Builtin {
        name: "quadratic_solved_model",
        about: "quadratic risk family with dispersion friction, mu = 0.5, lambda = 8",
        source: r#"kind = "contraction_sweep"
name = "quadratic_solved_model"

[params]
mu = 0.5
ts = [0.0, 0.25, 0.5, 0.75, 1.0]
grid_n = 401
family = { kind = "quadratic" }
friction = { kind = "dispersion", lambda = 8.0 }
"#,
    },
    Builtin {
        name: "log_vs_brier",
        about: "log and Brier Bayes risks with their curvature increment",
        source: r#"kind = "compare_losses"
name = "log_vs_brier"

[params]
a = { kind = "log" }
b = { kind = "brier" }
grid_n = 2001
"#,
    },
    Builtin {
        name: "ri_reversal_demo",
        about: "attention-price sweep for {0,1} versus {0.25,0.75} under matching costs",
        source: r#"kind = "ri_reversal"
name = "ri_reversal_demo"

[params]
decision = { c_fp = 1.0, c_fn = 1.0 }
q0 = { support = [0.0, 1.0], weights = [0.5, 0.5] }
q1 = { support = [0.25, 0.75], weights = [0.5, 0.5] }
lambdas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0]
"#,
    },
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

pub fn load_builtin(name: &str) -> Result<Scenario, ScenarioError> {
    let b = builtin(name).ok_or_else(|| invalid("builtin", format!("no builtin named `{name}`")))?;
    parse_scenario(b.source, b.name)
}

// ---------------------------------------------------------------- runners

pub fn run(s: &Scenario) -> Result<RunOutput, ScenarioError> {
    let tables = match &s.spec {
        ScenarioSpec::SolveLearning(p) => run_solve_learning(&s.name, p)?,
        ScenarioSpec::ContractionSweep(p) => run_contraction_sweep(&s.name, p)?,
        ScenarioSpec::CompareLosses(p) => run_compare_losses(&s.name, p)?,
        ScenarioSpec::PipelineCompare(p) => run_pipeline_compare(&s.name, p)?,
        ScenarioSpec::RiReversal(p) => run_ri_reversal(&s.name, p)?,
        ScenarioSpec::RlhfSweep(p) => run_rlhf_sweep(&s.name, p)?,
        ScenarioSpec::GoodhartBuiltin(p) => run_goodhart(&s.name, p)?,
        ScenarioSpec::Diagnostics(p) => run_diagnostics(&s.name, p)?,
        ScenarioSpec::SimplexCheck(p) => run_simplex_check(&s.name, s.seed, p)?,
    };
    Ok(RunOutput {
        name: s.name.clone(),
        seed: s.seed,
        tables,
    })
}

type Tables = Vec<(String, Table)>;

fn law_table(d: &PosteriorDist) -> Table {
    let mut t = Table::new(&["q", "weight"]);
    for (q, w) in d.atoms() {
        t.push(vec![q.into(), w.into()]);
    }
    t
}

fn run_solve_learning(name: &str, p: &SolveLearningParams) -> Result<Tables, ScenarioError> {
    let risk = p.risk.build().map_err(|e| invalid("params.risk", e))?;
    let friction = p.friction.build().map_err(|e| invalid("params.friction", e))?;
    let solution: Solution = match p.method {
        SolveMethodSpec::TwoPoint => {
            let problem = LearningProblem::new(risk, friction.clone(), p.mu, p.grid_n).map_err(|e| invalid("params", e))?;
            solve_two_point(&problem).map_err(|e| invalid("params.friction", e))?
        }
        SolveMethodSpec::ClosedForm => match (&p.risk, &p.friction) {
            (RiskSpec::QuadraticFamily { t }, FrictionSpec::Dispersion { lambda }) => {
                solve_quadratic_closed_form(p.mu, *lambda, *t).map_err(|e| invalid("params", e))?
            }
            _ => {
                return Err(invalid(
                    "params.method",
                    "closed_form needs risk kind quadratic_family and friction kind dispersion",
                ))
            }
        },
    };
    let mut summary = Table::new(&["method", "mu", "q_high", "second_moment", "objective", "friction_cost"]);
    summary.push(vec![
        format!("{:?}", solution.method).into(),
        p.mu.into(),
        solution.q_high().into(),
        solution.dist.second_moment().into(),
        solution.objective_value.into(),
        friction.eval(&solution.dist).into(),
    ]);
    Ok(vec![
        (format!("{name}.csv"), summary),
        (format!("{name}_law.csv"), law_table(&solution.dist)),
    ])
}

fn run_contraction_sweep(name: &str, p: &ContractionSweepParams) -> Result<Tables, ScenarioError> {
    let family = p.family.build().map_err(|e| invalid("params.family", e))?;
    let friction = p.friction.build().map_err(|e| invalid("params.friction", e))?;
    if p.ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("params.ts", "values must lie in [0, 1]"));
    }
    let report = contraction_sweep(&family, &friction, p.mu, &p.ts, p.grid_n).map_err(|e| invalid("params", e))?;
    let mut t = Table::new(&["t", "q_high", "second_moment", "objective", "friction_cost", "chain_ok"]);
    for (i, e) in report.entries.iter().enumerate() {
        t.push(vec![
            e.t.into(),
            e.solution.q_high().into(),
            e.solution.dist.second_moment().into(),
            e.solution.objective_value.into(),
            e.friction_cost.into(),
            report.link_ok_at(i).into(),
        ]);
    }
    Ok(vec![(format!("{name}.csv"), t)])
}

fn dv_label(v: DvVerdict) -> String {
    match v {
        DvVerdict::HoldsStrictly => "holds_strictly".into(),
        DvVerdict::Holds => "holds".into(),
        DvVerdict::FailsAt(q) => format!("fails_at_{}", format_num(q)),
    }
}

fn run_compare_losses(name: &str, p: &CompareLossesParams) -> Result<Tables, ScenarioError> {
    let ha = p.a.build().map_err(|e| invalid("params.a", e))?;
    let hb = p.b.build().map_err(|e| invalid("params.b", e))?;
    let analytic = ha.has_second_derivative() && hb.has_second_derivative();
    let diffs = increment_second_differences(&ha, &hb, p.grid_n, analytic).map_err(|e| invalid("params.grid_n", e))?;
    let step = 1.0 / (p.grid_n - 1) as f64;
    let mut curves = Table::new(&["q", "h_a", "h_b", "increment", "increment_curvature"]);
    for (q, d2) in diffs {
        let (a, b) = (ha.eval(q), hb.eval(q));
        curves.push(vec![q.into(), a.into(), b.into(), (b - a).into(), (d2 / (step * step)).into()]);
    }
    let dv = check_dv(&ha, &hb, p.grid_n, DEFAULT_CURVATURE_TOL).map_err(|e| invalid("params.grid_n", e))?;
    let order = concavity_order(&ha, &hb, p.grid_n).map_err(|e| invalid("params.grid_n", e))?;
    let mut summary = Table::new(&["a", "b", "increment_convex", "concavity_order"]);
    summary.push(vec![
        ha.name().into(),
        hb.name().into(),
        dv_label(dv).into(),
        format!("{order:?}").into(),
    ]);
    Ok(vec![
        (format!("{name}.csv"), curves),
        (format!("{name}_summary.csv"), summary),
    ])
}

fn run_pipeline_compare(name: &str, p: &PipelineCompareParams) -> Result<Tables, ScenarioError> {
    let dp = p.decision.build().map_err(|e| invalid("params.decision", e))?;
    let c = pipeline_compare(&dp, &p.q0, &p.q1);
    if !c.consistent() {
        return Err(ScenarioError::Invariant(format!(
            "welfare gap {} contradicts convex-order verdict {}",
            c.gap,
            c.cx_relation.as_str()
        )));
    }
    let mut t = Table::new(&["w0", "w1", "gap", "cx_relation", "consistent"]);
    t.push(vec![
        c.w0.into(),
        c.w1.into(),
        c.gap.into(),
        c.cx_relation.as_str().into(),
        c.consistent().into(),
    ]);
    Ok(vec![(format!("{name}.csv"), t)])
}

fn run_ri_reversal(name: &str, p: &RiReversalParams) -> Result<Tables, ScenarioError> {
    let dp = p.decision.build().map_err(|e| invalid("params.decision", e))?;
    let s = RiScenario::new(dp, p.q0.clone(), p.q1.clone())
        .map_err(|e| invalid("params.q1", e))?
        .with_unit(p.unit);
    let report = reversal_region(&s, &p.lambdas).map_err(|e| invalid("params.lambdas", e))?;
    if report.mi_order_violation {
        return Err(ScenarioError::Invariant("mutual information is not monotone in convex order".into()));
    }
    if !report.lambda_star_mismatches.is_empty() {
        return Err(ScenarioError::Invariant(format!(
            "reversal threshold mispredicts the winner at {:?}",
            report.lambda_star_mismatches
        )));
    }
    let mut sweep = Table::new(&["lambda_cog", "w0", "w1", "used0", "used1", "regime"]);
    for pt in &report.points {
        sweep.push(vec![
            pt.lambda_cog.into(),
            pt.w0.value.into(),
            pt.w1.value.into(),
            pt.w0.used.into(),
            pt.w1.used.into(),
            pt.regime.as_str().into(),
        ]);
    }
    let star = match reversal_threshold(&s) {
        Ok(x) => Cell::Num(x),
        Err(_) => Cell::Text("undefined".into()),
    };
    let mut summary = Table::new(&["lambda_bar_0", "lambda_bar_1", "lambda_star", "cx_relation"]);
    summary.push(vec![
        use_threshold(&s, Pipeline::Separated).into(),
        use_threshold(&s, Pipeline::Embedded).into(),
        star,
        report.cx_relation.as_str().into(),
    ]);
    Ok(vec![
        (format!("{name}.csv"), sweep),
        (format!("{name}_thresholds.csv"), summary),
    ])
}

fn run_rlhf_sweep(name: &str, p: &RlhfSweepParams) -> Result<Tables, ScenarioError> {
    p.generator.validate().map_err(|e| invalid("params.generator", e))?;
    let w_eval = p.w_eval.clone().unwrap_or_else(|| p.reward.weights.clone());
    let rows = lambda_sweep(&p.generator, &p.reward, &w_eval, &p.lambdas).map_err(|e| invalid("params", e))?;
    let mut t = Table::new(&["lambda", "achieved_eval", "tax", "mean_quality", "fosd_vs_base"]);
    for r in rows {
        t.push(vec![
            r.lambda.into(),
            r.achieved_eval.into(),
            r.tax.into(),
            r.mean_quality.into(),
            r.fosd_vs_base.into(),
        ]);
    }
    Ok(vec![(format!("{name}.csv"), t)])
}

/// Reward weight on true quality in the built-in reward-hacking example.
pub const GOODHART_ALPHA: f64 = 0.6;

fn run_goodhart(name: &str, p: &GoodhartParams) -> Result<Tables, ScenarioError> {
    let g = Generator::goodhart_example();
    let reward = RewardSpec::misspecified(vec![1.0], GOODHART_ALPHA);
    let base = induced_quality_dist(&g, &[1.0]).map_err(|e| ScenarioError::Invariant(e.to_string()))?;
    let mut t = Table::new(&[
        "lambda",
        "pi_z1",
        "pi_z2",
        "pi_z3",
        "tilted_mean",
        "base_mean",
        "below_base",
        "fosd_vs_base",
    ]);
    for &lambda in &p.lambdas {
        let tilted = tilt(&g, &reward, lambda).map_err(|e| invalid("params.lambdas", e))?;
        let law = induced_quality_dist(&tilted, &[1.0]).map_err(|e| ScenarioError::Invariant(e.to_string()))?;
        let probs = tilted.probs();
        t.push(vec![
            lambda.into(),
            probs[0].into(),
            probs[1].into(),
            probs[2].into(),
            law.mean().into(),
            base.mean().into(),
            (law.mean() < base.mean()).into(),
            crate::rlhf::fosd_check(&law, &base).into(),
        ]);
    }
    Ok(vec![(format!("{name}.csv"), t)])
}

/// Where the stop-loss curves of `a` and `b` first change order, if they do.
///
/// The difference is piecewise linear between support points, so the crossing
/// is located by linear interpolation on the bracketing breakpoints.
pub fn first_crossing(a: &PosteriorDist, b: &PosteriorDist) -> Option<f64> {
    let mut ks: Vec<f64> = a.support().iter().chain(b.support()).copied().chain([0.0, 1.0]).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let diff = |k: f64| stop_loss(a, k).unwrap() - stop_loss(b, k).unwrap();
    let mut sign = 0.0;
    let mut prev = (ks[0], diff(ks[0]));
    for &k in &ks {
        let d = diff(k);
        if d.abs() > PROB_TOL {
            if sign == 0.0 {
                sign = d.signum();
            } else if d.signum() != sign {
                let (k0, d0) = prev;
                if d0.abs() <= PROB_TOL {
                    return Some(k0);
                }
                return Some(k0 + d0 / (d0 - d) * (k - k0));
            }
        }
        prev = (k, d);
    }
    None
}

fn pair_verdict(a: &PosteriorDist, b: &PosteriorDist) -> String {
    match convex_order_compare(a, b) {
        CxOrdering::Incomparable => match first_crossing(a, b) {
            Some(k) => format!("crossing_at_{}", format_num(k)),
            None => CxOrdering::Incomparable.as_str().to_string(),
        },
        other => other.as_str().to_string(),
    }
}

/// Stop-loss matrix: one row per `k`, one column per law, and a final verdict
/// row comparing each column with the first.
pub fn stop_loss_diagnostic(dists: &[PosteriorDist], labels: &[String], k_grid: &[f64]) -> Result<Table, ScenarioError> {
    if dists.is_empty() {
        return Err(invalid("params.dists", "need at least one distribution"));
    }
    if labels.len() != dists.len() {
        return Err(invalid(
            "params.labels",
            format!("{} labels for {} distributions", labels.len(), dists.len()),
        ));
    }
    let mut cols = vec!["k"];
    cols.extend(labels.iter().map(String::as_str));
    let mut t = Table::new(&cols);
    for &k in k_grid {
        let mut row: Vec<Cell> = vec![k.into()];
        for d in dists {
            row.push(stop_loss(d, k).map_err(|e| invalid("params.k_grid", e))?.into());
        }
        t.push(row);
    }
    let mut verdict: Vec<Cell> = vec!["verdict".into(), "reference".into()];
    for d in &dists[1..] {
        verdict.push(pair_verdict(&dists[0], d).into());
    }
    t.push(verdict);
    Ok(t)
}

fn run_diagnostics(name: &str, p: &DiagnosticsParams) -> Result<Tables, ScenarioError> {
    let labels = p
        .labels
        .clone()
        .unwrap_or_else(|| (0..p.dists.len()).map(|i| format!("d{i}")).collect());
    let t = stop_loss_diagnostic(&p.dists, &labels, &p.k_grid)?;
    Ok(vec![(format!("{name}.csv"), t)])
}

fn run_simplex_check(name: &str, seed: u64, p: &SimplexCheckParams) -> Result<Tables, ScenarioError> {
    let mut pairs: Vec<(&str, SimplexDist, SimplexDist)> =
        p.pairs.iter().map(|x| ("given", x.a.clone(), x.b.clone())).collect();
    if p.random > 0 {
        if p.k < 2 {
            return Err(invalid("params.k", "need at least two states"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..p.random {
            let a = random_simplex_dist(&mut rng, p.k, 4);
            let b = random_contraction(&mut rng, &a, 3);
            pairs.push(("random", a, b));
        }
    }
    if pairs.is_empty() {
        return Err(invalid("params.pairs", "no pairs given and random = 0"));
    }
    let k = pairs[0].1.dim();
    let dp = p.decision.clone().unwrap_or_else(|| DecisionProblemK::matching(k));
    let mut t = Table::new(&["pair", "source", "verdict", "witness_gap_a", "witness_gap_b", "welfare_a", "welfare_b"]);
    for (i, (source, a, b)) in pairs.iter().enumerate() {
        let field = if *source == "given" { "params.pairs" } else { "params.random" };
        let r = cx_compare_k_report(a, b).map_err(|e| invalid(field, e))?;
        let wa = welfare_k(&dp, a).map_err(|e| invalid("params.decision", e))?;
        let wb = welfare_k(&dp, b).map_err(|e| invalid("params.decision", e))?;
        let gap_a = r.a_refuted.as_ref().map(|w| w.gap(a, b));
        let gap_b = r.b_refuted.as_ref().map(|w| w.gap(b, a));
        if r.ordering == CxOrdering::ADominates && wa < wb - 1e-12 || r.ordering == CxOrdering::BDominates && wb < wa - 1e-12 {
            return Err(ScenarioError::Invariant(format!("pair {i}: dominated law has higher welfare")));
        }
        if gap_a.is_some_and(|g| g <= 0.0) || gap_b.is_some_and(|g| g <= 0.0) {
            return Err(ScenarioError::Invariant(format!("pair {i}: convex witness does not separate")));
        }
        let opt = |g: Option<f64>| g.map_or(Cell::Text(String::new()), Cell::Num);
        t.push(vec![
            i.into(),
            (*source).into(),
            r.ordering.as_str().into(),
            opt(gap_a),
            opt(gap_b),
            wa.into(),
            wb.into(),
        ]);
    }
    Ok(vec![(format!("{name}.csv"), t)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(c: &Cell) -> f64 {
        match c {
            Cell::Num(x) => *x,
            other => panic!("not a number: {other:?}"),
        }
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.743, 1.0 / 3.0, 1e-7, 123456.789, -2.5e20, 0.1 + 0.2, 5e-324] {
            let s = format_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_num(0.0), "0");
        assert_eq!(format_num(0.5), "0.50000000000000000");
    }

    #[test]
    fn builtins_parse_and_run() {
        for b in BUILTINS {
            let s = load_builtin(b.name).unwrap();
            assert_eq!(s.name, b.name);
            run(&s).unwrap();
        }
    }

    #[test]
    fn quadratic_builtin_q_high_column() {
        let out = run(&load_builtin("quadratic_solved_model").unwrap()).unwrap();
        let t = out.table("quadratic_solved_model.csv").unwrap();
        let ts: Vec<f64> = t.column("t").unwrap().into_iter().map(num).collect();
        let qh: Vec<f64> = t.column("q_high").unwrap().into_iter().map(num).collect();
        for (t, want) in [(0.0, 0.75), (0.5, 0.625), (1.0, 0.5)] {
            let i = ts.iter().position(|x| *x == t).unwrap();
            assert!((qh[i] - want).abs() <= 0.0025, "t={t}: {}", qh[i]);
        }
        assert!(t.column("chain_ok").unwrap().iter().all(|c| **c == Cell::Bool(true)));
    }

    #[test]
    fn goodhart_builtin_base_mean() {
        let out = run(&load_builtin("goodhart_builtin").unwrap()).unwrap();
        let t = out.table("goodhart_builtin.csv").unwrap();
        assert!(t.column("base_mean").unwrap().iter().all(|c| (num(c) - 0.743).abs() < 1e-15));
        let last = num(t.column("tilted_mean").unwrap().last().unwrap());
        assert!((last - 0.4).abs() < 1e-3);
    }

    #[test]
    fn csv_header_and_body() {
        let out = run(&load_builtin("goodhart_builtin").unwrap()).unwrap();
        let (_, text) = &out.render()[0];
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            format!("# scenario=goodhart_builtin version={VERSION} seed=0")
        );
        assert!(lines.next().unwrap().starts_with("lambda,pi_z1"));
    }

    #[test]
    fn validation_errors_name_the_field() {
        let text = "kind = \"solve_learning\"\n[params]\nrisk = { kind = \"brier\" }\nfriction = { kind = \"zero\" }\n";
        match parse_scenario(text, "x").unwrap_err() {
            ScenarioError::Validation { field, .. } => assert_eq!(field, "mu"),
            e => panic!("{e:?}"),
        }
        let text = "kind = \"solve_learning\"\n[params]\nmu = \"half\"\nrisk = { kind = \"brier\" }\nfriction = { kind = \"zero\" }\n";
        match parse_scenario(text, "x").unwrap_err() {
            ScenarioError::Validation { field, .. } => assert_eq!(field, "mu"),
            e => panic!("{e:?}"),
        }
        let text = "kind = \"solve_learning\"\n[params]\nmu = 1.5\nrisk = { kind = \"brier\" }\nfriction = { kind = \"zero\" }\n";
        let s = parse_scenario(text, "x").unwrap();
        assert!(matches!(run(&s), Err(ScenarioError::Validation { .. })));
        assert_eq!(
            parse_scenario("kind = \"nope\"\n", "x").unwrap_err(),
            ScenarioError::UnknownKind("nope".into())
        );
        assert!(matches!(parse_scenario("kind = [", "x"), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn stop_loss_examples() {
        let coin = PosteriorDist::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let half = PosteriorDist::point_mass(0.5).unwrap();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let t = stop_loss_diagnostic(&[coin.clone(), half], &["coin".into(), "half".into()], &grid).unwrap();
        let want = [(0.5, 0.5), (0.375, 0.25), (0.25, 0.0), (0.125, 0.0), (0.0, 0.0)];
        for (row, (a, b)) in t.rows.iter().zip(want) {
            assert!((num(&row[1]) - a).abs() < 1e-15 && (num(&row[2]) - b).abs() < 1e-15);
        }
        assert_eq!(t.rows.last().unwrap()[2], Cell::Text("a_dominates".into()));

        let t = stop_loss_diagnostic(&[coin.clone(), coin.clone()], &["x".into(), "y".into()], &grid).unwrap();
        assert_eq!(t.rows.last().unwrap()[2], Cell::Text("equal".into()));

        let a = PosteriorDist::new(&[0.1, 0.9], &[0.5, 0.5]).unwrap();
        let b = PosteriorDist::new(&[0.0, 0.5, 1.0], &[0.25, 0.5, 0.25]).unwrap();
        let k = first_crossing(&a, &b).unwrap();
        assert!((k - 0.2).abs() < 1e-12);
        let t = stop_loss_diagnostic(&[a, b], &["a".into(), "b".into()], &grid).unwrap();
        assert_eq!(t.rows.last().unwrap()[2], Cell::Text(format!("crossing_at_{}", format_num(k))));
    }

    #[test]
    fn simplex_check_random_is_seeded() {
        let text = "kind = \"simplex_check\"\nseed = 11\n[params]\nrandom = 20\nk = 3\n";
        let s = parse_scenario(text, "sc").unwrap();
        let a = run(&s).unwrap().render();
        let b = run(&s).unwrap().render();
        assert_eq!(a, b);
    }
}
