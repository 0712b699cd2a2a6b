//! Scenario files, reports, and the self-check suite behind the `magrav`
//! command-line binary.
//!
//! A *scenario* is a line-oriented text file that declares a chart, a set of
//! named geometric objects over it, and an ordered list of tasks to run.
//! [`run`] executes the tasks (in parallel unless asked otherwise) and
//! returns a [`Report`] whose text and JSON renderings are byte-for-byte
//! deterministic for a fixed scenario and seed.
//!
//! # File format
//!
//! Blank lines and lines starting with `#` are ignored.  Everything else is
//! either a section header `[kind]` / `[kind name]` or an assignment
//! `key = value` belonging to the most recent header.
//!
//! ```text
//! [chart]
//! dim = 4            # 2, 3 or 4; coordinates are always x0 .. x{dim-1}
//! params = m         # optional extra constant symbols
//!
//! [metric g]
//! signature = lorentzian          # or riemannian (default lorentzian)
//! diag = 1 - 2*m/x1, -1/(1 - 2*m/x1), -x1^2, -x1^2*sin(x2)^2
//!
//! [task]
//! op = christoffel
//! metric = g
//! ```
//!
//! Object sections and their keys:
//!
//! * `[metric NAME]` — `signature`, and either `diag = e0, …` or symmetric
//!   component assignments `01 = expr` (two index digits, row `μ` column `ν`);
//! * `[tetrad NAME]` — `diag = …` or components `a μ` as two digits (the
//!   coframe `h^a_μ`); must be nondegenerate;
//! * `[connection NAME]` — components `λ μ ν` as three digits (the
//!   coefficients `Γ_λ^μ_ν`); unset components are zero;
//! * `[vector-field NAME]`, `[one-form NAME]` — one index digit per key;
//! * `[spinor-field NAME]` — keys `re0` … `re3`, `im0` … `im3` (dimension-4
//!   charts only);
//! * `[lagrangian NAME]` — `dim = n` plus `density = expr` written in the
//!   first-order jet variables (`si{ab}`, `si{ab}_{l}`, `k{lab}`,
//!   `k{lab}_{m}`, `sq`, …).
//!
//! `[task]` sections carry `op = name`, an optional `id = label` (default
//! `task1`, `task2`, …), an optional `samples = n` override for the zero
//! tester, and the operation's own argument keys.  The operations are listed
//! in the module-level table below; unknown operations and references to
//! objects of the wrong kind are reported per task without aborting the rest
//! of the run.
//!
//! | op | arguments | output |
//! |----|-----------|--------|
//! | `christoffel` | `metric` | nonzero `Gamma[λ][μ][ν]` |
//! | `curvature` | `connection` or `metric` | nonzero `R[λ][μ][α][β]` |
//! | `ricci` | `connection` or `metric` | nonzero `Ric[μ][β]` |
//! | `scalar_curvature` | `metric`, opt. `connection`, opt. `expect` | value + zero check |
//! | `torsion` | `connection`, opt. `expect_zero` | nonzero `T[μ][ν][λ]` |
//! | `nonmetricity` | `connection`, `metric`, opt. `expect_zero` | nonzero `Q[λ][μ][ν]` |
//! | `levi_civita_check` | `metric` | torsion and nonmetricity checks |
//! | `splitting_round_trip` | `connection`, `metric` | round-trip check |
//! | `lift_bracket_check` | `kind`, `u`, `v` | bracket functoriality check |
//! | `metric_from_tetrad` | `tetrad` | nonzero `g[μ][ν]` |
//! | `spin_connection` | `tetrad`, `connection` | nonzero `Omega[λ][a][b]` |
//! | `dirac` | `tetrad`, `connection`, `spinor` | the four components |
//! | `field_equations` | `dim` | vacuum field-equation checks |
//! | `invariance_identities` | `lagrangian`, opt. `dim` | identity checks |
//! | `noether_identities` | `lagrangian`, opt. `dim` | identity checks |
//! | `energy_momentum_check` | `lagrangian`, opt. `dim`, opt. `sampler` | current checks |
//! | `superpotential_check` | `lagrangian`, opt. `dim`, opt. `compare_classical` | superpotential checks |
//! | `nilpotency_check` | opt. `dim` (default 2) | nilpotency checks |
//! | `clifford_check` | — | gamma-matrix anticommutator check |
//! | `zero_test` | `expr` | zero check |
//!
//! The `lagrangian` argument accepts a `[lagrangian NAME]` section or one of
//! the built-in names `hilbert_einstein` / `yang_mills` (which then require
//! the `dim` key).  The `kind` of a lift is one of `tangent`, `cotangent`,
//! `frame`, `connection`, `metric`.
//!
//! # Determinism
//!
//! Task records keep their wall-clock duration in memory (see
//! [`TaskRecord::wall`]) but neither rendering includes it, so two runs of
//! the same scenario with the same seed produce byte-identical reports even
//! though timings differ.  Each task derives its zero-test seed from the
//! global seed and the task position, independent of execution order.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use num::{BigRational, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::brst;
use crate::corpus;
use crate::error::{Error, Result};
use crate::geometry::{
    christoffel, curvature, decompose, metric_from_tetrad, nonmetricity, ricci, scalar_curvature,
    torsion, Chart, MetricField, Signature, SlotSymmetry, TensorField, TetradField,
    WorldConnection,
};
use crate::lifts::{
    lift_connection_bundle, lift_frame, lift_sigma_c, lift_tensor, BaseVectorField,
    LiftedVectorField,
};
use crate::report::CheckReport;
use crate::spinor::{self, CExpr, SpinorFieldExpr};
use crate::symexpr::zerotest::{is_zero, Verdict, WitnessValue, ZeroCfg};
use crate::symexpr::Expr;
use crate::variational::{
    hilbert_einstein, identities, yang_mills, JetContext, LagrangianDensity, OnShellSampler,
};

/// Default zero-test seed, shared with [`ZeroCfg::default`].
pub const DEFAULT_SEED: u64 = 0x6d61_6772;

/// Default number of samples for probabilistic zero tests.
pub const DEFAULT_SAMPLES: usize = 32;

/// Runtime options for [`run`].
#[derive(Debug, Clone)]
pub struct RunCfg {
    /// Global zero-test seed; each task mixes in its own position.
    pub seed: u64,
    /// Default sample count, overridable per task with `samples = n`.
    pub samples: usize,
    /// Execute tasks one after another instead of in parallel.
    pub serial: bool,
}

impl Default for RunCfg {
    fn default() -> RunCfg {
        RunCfg {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            serial: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One line of task output: either a named value or a named zero-test check.
#[derive(Debug, Clone)]
pub enum ReportItem {
    /// A named value, already rendered to a string.
    Text {
        /// Label, e.g. `Gamma[0][1][1]`.
        name: String,
        /// Rendered value.
        value: String,
    },
    /// A named identity check with the verdict of its zero test.
    Check {
        /// What the check verifies.
        name: String,
        /// Outcome.
        verdict: Verdict,
    },
}

/// How a task ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskStatus {
    /// Ran to completion and every check certified zero.
    Ok,
    /// Ran to completion but at least one check found a nonzero witness.
    Failed,
    /// Could not run (unknown operation, missing object, bad arguments, …).
    Errored(String),
}

/// The outcome of a single task.
#[derive(Debug, Clone)]
pub struct TaskRecord {
    /// Task identifier (the `id` key, or `task{n}` by position).
    pub id: String,
    /// Operation name.
    pub op: String,
    /// Final status.
    pub status: TaskStatus,
    /// Ordered output items.
    pub items: Vec<ReportItem>,
    /// Wall-clock duration.  Kept for callers (the binary logs it to stderr)
    /// but deliberately excluded from both renderings so reports stay
    /// byte-deterministic.
    pub wall: Duration,
}

/// An ordered collection of task records for one scenario run.
#[derive(Debug, Clone)]
pub struct Report {
    /// Scenario title (its file stem, or `selfcheck`).
    pub title: String,
    /// One record per task, in task order.
    pub records: Vec<TaskRecord>,
}

impl Report {
    /// True when no task errored and no check returned nonzero; this is the
    /// process exit-status contract (`0` iff passed).
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status == TaskStatus::Ok)
    }

    fn counts(&self) -> (usize, usize) {
        let failed = self
            .records
            .iter()
            .filter(|r| r.status == TaskStatus::Failed)
            .count();
        let errored = self
            .records
            .iter()
            .filter(|r| matches!(r.status, TaskStatus::Errored(_)))
            .count();
        (failed, errored)
    }

    /// Plain-text rendering (deterministic; no timings).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("report: {}\n", self.title));
        for rec in &self.records {
            let status = match &rec.status {
                TaskStatus::Ok => "ok".to_string(),
                TaskStatus::Failed => "FAILED".to_string(),
                TaskStatus::Errored(msg) => format!("error: {msg}"),
            };
            out.push_str(&format!("-- {} ({}) --\n", rec.id, rec.op));
            out.push_str(&format!("status: {status}\n"));
            for item in &rec.items {
                match item {
                    ReportItem::Text { name, value } => {
                        out.push_str(&format!("  {name} = {value}\n"));
                    }
                    ReportItem::Check { name, verdict } => {
                        let tag = if verdict.is_zero() { "ok " } else { "FAIL" };
                        out.push_str(&format!("  [{tag}] {name}: {verdict}\n"));
                    }
                }
            }
        }
        let (failed, errored) = self.counts();
        out.push_str(&format!(
            "summary: {} tasks, {failed} failed, {errored} errored\n",
            self.records.len()
        ));
        out
    }

    /// JSON rendering (deterministic; no timings).  Rational numbers appear
    /// as exact strings together with a float approximation.
    pub fn render_json(&self) -> String {
        let tasks: Vec<Value> = self
            .records
            .iter()
            .map(|rec| {
                let items: Vec<Value> = rec.items.iter().map(item_json).collect();
                let mut task = json!({
                    "id": rec.id,
                    "op": rec.op,
                    "status": match &rec.status {
                        TaskStatus::Ok => "ok",
                        TaskStatus::Failed => "failed",
                        TaskStatus::Errored(_) => "errored",
                    },
                    "items": items,
                });
                if let TaskStatus::Errored(msg) = &rec.status {
                    task["error"] = Value::String(msg.clone());
                }
                task
            })
            .collect();
        let (failed, errored) = self.counts();
        let doc = json!({
            "report": self.title,
            "tasks": tasks,
            "summary": {
                "tasks": self.records.len(),
                "failed": failed,
                "errored": errored,
                "passed": self.passed(),
            },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
        s.push('\n');
        s
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

fn rational_json(r: &BigRational) -> Value {
    json!({
        "exact": r.to_string(),
        "approx": r.to_f64().map(Value::from).unwrap_or(Value::Null),
    })
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::ProvenZero => json!({ "state": "proven-zero" }),
        Verdict::ProbablyZero { samples } => {
            json!({ "state": "probably-zero", "samples": samples })
        }
        Verdict::Nonzero { witness, value } => {
            let witness: Vec<Value> = witness
                .iter()
                .map(|(sym, val)| {
                    let mut w = rational_json(val);
                    w["var"] = Value::String(sym.to_string());
                    w
                })
                .collect();
            let value = match value {
                WitnessValue::Exact(r) => rational_json(r),
                WitnessValue::Approx(f) => json!({ "approx": f }),
            };
            json!({ "state": "nonzero", "witness": witness, "value": value })
        }
    }
}

fn item_json(item: &ReportItem) -> Value {
    match item {
        ReportItem::Text { name, value } => {
            json!({ "kind": "text", "name": name, "value": value })
        }
        ReportItem::Check { name, verdict } => {
            json!({ "kind": "check", "name": name, "verdict": verdict_json(verdict) })
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Chart,
    Metric,
    Tetrad,
    Connection,
    VectorField,
    OneForm,
    SpinorField,
    Lagrangian,
    Task,
}

impl SectionKind {
    fn parse(word: &str) -> Option<SectionKind> {
        Some(match word {
            "chart" => SectionKind::Chart,
            "metric" => SectionKind::Metric,
            "tetrad" => SectionKind::Tetrad,
            "connection" => SectionKind::Connection,
            "vector-field" => SectionKind::VectorField,
            "one-form" => SectionKind::OneForm,
            "spinor-field" => SectionKind::SpinorField,
            "lagrangian" => SectionKind::Lagrangian,
            "task" => SectionKind::Task,
            _ => return None,
        })
    }

    fn named(self) -> bool {
        !matches!(self, SectionKind::Chart | SectionKind::Task)
    }

    fn word(self) -> &'static str {
        match self {
            SectionKind::Chart => "chart",
            SectionKind::Metric => "metric",
            SectionKind::Tetrad => "tetrad",
            SectionKind::Connection => "connection",
            SectionKind::VectorField => "vector-field",
            SectionKind::OneForm => "one-form",
            SectionKind::SpinorField => "spinor-field",
            SectionKind::Lagrangian => "lagrangian",
            SectionKind::Task => "task",
        }
    }
}

#[derive(Debug, Clone)]
struct Section {
    line: usize,
    kind: SectionKind,
    name: Option<String>,
    entries: Vec<(usize, String, String)>,
}

/// A parsed scenario: a validated list of sections, ready to [`run`].
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Title used in reports.
    pub title: String,
    sections: Vec<Section>,
}

fn scn_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Scenario {
        line,
        msg: msg.into(),
    }
}

impl Scenario {
    /// Parse scenario text.  `title` is carried into the report (callers pass
    /// the file stem).  Errors carry one-based line numbers.
    pub fn parse(text: &str, title: &str) -> Result<Scenario> {
        let mut sections: Vec<Section> = Vec::new();
        let mut names: HashSet<String> = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| scn_err(line, "unclosed `[` in section header"))?
                    .trim();
                let mut words = header.split_whitespace();
                let kind_word = words
                    .next()
                    .ok_or_else(|| scn_err(line, "empty section header"))?;
                let kind = SectionKind::parse(kind_word).ok_or_else(|| {
                    scn_err(line, format!("unknown section kind `{kind_word}`"))
                })?;
                let name = words.next().map(str::to_string);
                if words.next().is_some() {
                    return Err(scn_err(line, "too many words in section header"));
                }
                match (&name, kind.named()) {
                    (None, true) => {
                        return Err(scn_err(
                            line,
                            format!("section `[{kind_word}]` needs a name: `[{kind_word} NAME]`"),
                        ))
                    }
                    (Some(_), false) => {
                        return Err(scn_err(
                            line,
                            format!("section `[{kind_word}]` does not take a name"),
                        ))
                    }
                    _ => {}
                }
                if let Some(n) = &name {
                    if !names.insert(n.clone()) {
                        return Err(scn_err(line, format!("duplicate object name `{n}`")));
                    }
                }
                sections.push(Section {
                    line,
                    kind,
                    name,
                    entries: Vec::new(),
                });
            } else if let Some(eq) = trimmed.find('=') {
                let key = trimmed[..eq].trim().to_string();
                let value = trimmed[eq + 1..].trim().to_string();
                if key.is_empty() {
                    return Err(scn_err(line, "missing key before `=`"));
                }
                let section = sections
                    .last_mut()
                    .ok_or_else(|| scn_err(line, "assignment before any `[section]` header"))?;
                if section.entries.iter().any(|(_, k, _)| k == &key) {
                    return Err(scn_err(
                        line,
                        format!("duplicate key `{key}` in this section"),
                    ));
                }
                section.entries.push((line, key, value));
            } else {
                return Err(scn_err(
                    line,
                    "expected `[section]` header or `key = value`",
                ));
            }
        }
        if sections
            .iter()
            .filter(|s| s.kind == SectionKind::Chart)
            .count()
            > 1
        {
            let dup = sections
                .iter()
                .filter(|s| s.kind == SectionKind::Chart)
                .nth(1)
                .unwrap();
            return Err(scn_err(dup.line, "duplicate `[chart]` section"));
        }
        Ok(Scenario {
            title: title.to_string(),
            sections,
        })
    }

    /// True when the scenario declares nothing at all.
    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }
}

/// Split on top-level commas (commas inside parentheses do not split).
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

fn digit_indices(line: usize, key: &str, count: usize, dim: usize) -> Result<Vec<usize>> {
    let digits: Vec<usize> = key
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| {
            scn_err(
                line,
                format!("expected {count} index digits, found key `{key}`"),
            )
        })?;
    if digits.len() != count {
        return Err(scn_err(
            line,
            format!("expected {count} index digits, found key `{key}`"),
        ));
    }
    for &d in &digits {
        if d >= dim {
            return Err(scn_err(
                line,
                format!("index {d} out of range for dimension {dim}"),
            ));
        }
    }
    Ok(digits)
}

// ---------------------------------------------------------------------------
// Object registry
// ---------------------------------------------------------------------------

struct Objects {
    chart: Chart,
    kinds: HashMap<String, &'static str>,
    metrics: HashMap<String, MetricField>,
    tetrads: HashMap<String, TetradField>,
    connections: HashMap<String, WorldConnection>,
    vectors: HashMap<String, BaseVectorField>,
    one_forms: HashMap<String, TensorField>,
    spinors: HashMap<String, SpinorFieldExpr>,
    lagrangians: HashMap<String, LagrangianDensity>,
}

impl Objects {
    fn lookup<'a, T>(
        &self,
        map: &'a HashMap<String, T>,
        want: &'static str,
        name: &str,
        line: usize,
    ) -> Result<&'a T> {
        map.get(name).ok_or_else(|| match self.kinds.get(name) {
            Some(kind) => scn_err(
                line,
                format!("`{name}` is a {kind}, but a {want} is required"),
            ),
            None => scn_err(line, format!("no {want} named `{name}`")),
        })
    }
}

fn parse_expr(chart: &Chart, line: usize, key: &str, value: &str) -> Result<Expr> {
    chart
        .parse(value)
        .map_err(|e| scn_err(line, format!("in `{key}`: {e}")))
}

fn build_chart(section: &Section) -> Result<Chart> {
    let mut dim: Option<usize> = None;
    let mut params: Vec<String> = Vec::new();
    for (line, key, value) in &section.entries {
        match key.as_str() {
            "dim" => {
                dim = Some(value.parse().map_err(|_| {
                    scn_err(*line, format!("`dim` must be an integer, found `{value}`"))
                })?);
            }
            "params" => {
                params = split_top_level(value)
                    .into_iter()
                    .filter(|p| !p.is_empty())
                    .map(str::to_string)
                    .collect();
            }
            other => {
                return Err(scn_err(*line, format!("unknown chart key `{other}`")));
            }
        }
    }
    let dim = dim.ok_or_else(|| scn_err(section.line, "`[chart]` needs `dim = 2|3|4`"))?;
    let refs: Vec<&str> = params.iter().map(String::as_str).collect();
    Chart::with_params(dim, &refs).map_err(|e| scn_err(section.line, format!("chart: {e}")))
}

/// Dense symmetric/square component table fed by `diag = …` or 2-digit keys.
fn build_square_components(
    chart: &Chart,
    section: &Section,
    symmetric: bool,
    skip: &[&str],
) -> Result<Vec<Expr>> {
    let dim = chart.dim();
    let mut comps = vec![Expr::zero(); dim * dim];
    let mut used_diag = false;
    let mut used_comp = false;
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (line, key, value) in &section.entries {
        if skip.contains(&key.as_str()) {
            continue;
        }
        if key == "diag" {
            used_diag = true;
            let parts = split_top_level(value);
            if parts.len() != dim {
                return Err(scn_err(
                    *line,
                    format!("`diag` needs {dim} entries, found {}", parts.len()),
                ));
            }
            for (i, part) in parts.iter().enumerate() {
                comps[i * dim + i] = parse_expr(chart, *line, key, part)?;
            }
        } else {
            used_comp = true;
            let idx = digit_indices(*line, key, 2, dim)?;
            let (a, b) = (idx[0], idx[1]);
            let canon = if symmetric && a > b { (b, a) } else { (a, b) };
            if !seen.insert(canon) {
                return Err(scn_err(
                    *line,
                    format!("component `{key}` was already assigned"),
                ));
            }
            let e = parse_expr(chart, *line, key, value)?;
            comps[a * dim + b] = e.clone();
            if symmetric {
                comps[b * dim + a] = e;
            }
        }
    }
    if used_diag && used_comp {
        return Err(scn_err(
            section.line,
            "mixing `diag` and per-component keys in one section",
        ));
    }
    Ok(comps)
}

fn build_metric(chart: &Chart, section: &Section) -> Result<MetricField> {
    let name = section.name.as_deref().unwrap_or_default();
    let mut signature = Signature::Lorentzian;
    for (line, key, value) in &section.entries {
        if key == "signature" {
            signature = match value.as_str() {
                "lorentzian" => Signature::Lorentzian,
                "riemannian" => Signature::Riemannian,
                other => {
                    return Err(scn_err(
                        *line,
                        format!("signature must be `lorentzian` or `riemannian`, found `{other}`"),
                    ))
                }
            };
        }
    }
    let comps = build_square_components(chart, section, true, &["signature"])?;
    let lower = TensorField::new(chart, 0, 2, comps, vec![SlotSymmetry::Symmetric(0, 1)])
        .map_err(|e| scn_err(section.line, format!("metric `{name}`: {e}")))?;
    MetricField::new(chart, lower, signature)
        .map_err(|e| scn_err(section.line, format!("metric `{name}`: {e}")))
}

fn build_tetrad(chart: &Chart, section: &Section) -> Result<TetradField> {
    let name = section.name.as_deref().unwrap_or_default();
    let comps = build_square_components(chart, section, false, &[])?;
    TetradField::new(chart, comps)
        .map_err(|e| scn_err(section.line, format!("tetrad `{name}`: {e}")))
}

fn build_connection(chart: &Chart, section: &Section) -> Result<WorldConnection> {
    let dim = chart.dim();
    let mut table: HashMap<(usize, usize, usize), Expr> = HashMap::new();
    for (line, key, value) in &section.entries {
        let idx = digit_indices(*line, key, 3, dim)?;
        let e = parse_expr(chart, *line, key, value)?;
        table.insert((idx[0], idx[1], idx[2]), e);
    }
    Ok(WorldConnection::from_fn(chart, |l, m, n| {
        table.get(&(l, m, n)).cloned().unwrap_or_else(Expr::zero)
    }))
}

fn build_covector(chart: &Chart, section: &Section, co: bool) -> Result<Vec<Expr>> {
    let dim = chart.dim();
    let what = if co { "one-form" } else { "vector field" };
    let mut comps = vec![Expr::zero(); dim];
    for (line, key, value) in &section.entries {
        let idx = digit_indices(*line, key, 1, dim)
            .map_err(|e| match e {
                Error::Scenario { line, msg } => {
                    scn_err(line, format!("{what} components use one index digit: {msg}"))
                }
                other => other,
            })?;
        comps[idx[0]] = parse_expr(chart, *line, key, value)?;
    }
    Ok(comps)
}

fn build_spinor(chart: &Chart, section: &Section) -> Result<SpinorFieldExpr> {
    let name = section.name.as_deref().unwrap_or_default();
    let mut re = vec![Expr::zero(); spinor::DIM];
    let mut im = vec![Expr::zero(); spinor::DIM];
    for (line, key, value) in &section.entries {
        let (target, rest) = if let Some(rest) = key.strip_prefix("re") {
            (&mut re, rest)
        } else if let Some(rest) = key.strip_prefix("im") {
            (&mut im, rest)
        } else {
            return Err(scn_err(
                *line,
                format!("spinor components are `re0`..`re3` / `im0`..`im3`, found `{key}`"),
            ));
        };
        let k: usize = rest.parse().map_err(|_| {
            scn_err(*line, format!("bad spinor component index in `{key}`"))
        })?;
        if k >= spinor::DIM {
            return Err(scn_err(
                *line,
                format!("spinor component index {k} out of range"),
            ));
        }
        target[k] = parse_expr(chart, *line, key, value)?;
    }
    let comps: Vec<CExpr> = re
        .into_iter()
        .zip(im)
        .map(|(r, i)| CExpr::new(r, i))
        .collect();
    SpinorFieldExpr::new(chart, comps)
        .map_err(|e| scn_err(section.line, format!("spinor field `{name}`: {e}")))
}

fn build_lagrangian(section: &Section) -> Result<LagrangianDensity> {
    let name = section.name.clone().unwrap_or_default();
    let mut dim: Option<usize> = None;
    let mut density: Option<(usize, String)> = None;
    for (line, key, value) in &section.entries {
        match key.as_str() {
            "dim" => {
                dim = Some(value.parse().map_err(|_| {
                    scn_err(*line, format!("`dim` must be an integer, found `{value}`"))
                })?);
            }
            "density" => density = Some((*line, value.clone())),
            other => {
                return Err(scn_err(*line, format!("unknown lagrangian key `{other}`")));
            }
        }
    }
    let dim = dim.ok_or_else(|| scn_err(section.line, "`[lagrangian]` needs `dim = n`"))?;
    let (dline, dtext) =
        density.ok_or_else(|| scn_err(section.line, "`[lagrangian]` needs `density = expr`"))?;
    let ctx = JetContext::new(dim).map_err(|e| scn_err(section.line, e.to_string()))?;
    let expr = crate::symexpr::parse::parse(&dtext, ctx.table())
        .map_err(|e| scn_err(dline, format!("in `density`: {e}")))?;
    LagrangianDensity::with_label(&ctx, expr, &name)
        .map_err(|e| scn_err(section.line, format!("lagrangian `{name}`: {e}")))
}

fn build_objects(sections: &[Section]) -> Result<(Objects, Vec<TaskSpec>)> {
    let chart_section = sections.iter().find(|s| s.kind == SectionKind::Chart);
    let first_needy = sections.iter().find(|s| {
        !matches!(
            s.kind,
            SectionKind::Chart | SectionKind::Lagrangian | SectionKind::Task
        )
    });
    let chart = match (chart_section, first_needy) {
        (Some(sec), _) => build_chart(sec)?,
        (None, Some(needy)) => {
            return Err(scn_err(
                needy.line,
                "a `[chart]` section must come before objects and tasks",
            ))
        }
        // Lagrangian-only scenarios carry their own dimension; any chart works
        // as a placeholder since nothing references it.
        (None, None) => Chart::new(2).expect("dimension 2 is always valid"),
    };
    if let (Some(c), Some(n)) = (chart_section, first_needy) {
        if n.line < c.line {
            return Err(scn_err(
                n.line,
                "a `[chart]` section must come before objects and tasks",
            ));
        }
    }

    let mut objs = Objects {
        chart,
        kinds: HashMap::new(),
        metrics: HashMap::new(),
        tetrads: HashMap::new(),
        connections: HashMap::new(),
        vectors: HashMap::new(),
        one_forms: HashMap::new(),
        spinors: HashMap::new(),
        lagrangians: HashMap::new(),
    };
    let mut tasks = Vec::new();
    for section in sections {
        let name = section.name.clone().unwrap_or_default();
        if section.kind.named() {
            objs.kinds.insert(name.clone(), section.kind.word());
        }
        match section.kind {
            SectionKind::Chart => {}
            SectionKind::Metric => {
                let m = build_metric(&objs.chart, section)?;
                objs.metrics.insert(name, m);
            }
            SectionKind::Tetrad => {
                let t = build_tetrad(&objs.chart, section)?;
                objs.tetrads.insert(name, t);
            }
            SectionKind::Connection => {
                let c = build_connection(&objs.chart, section)?;
                objs.connections.insert(name, c);
            }
            SectionKind::VectorField => {
                let comps = build_covector(&objs.chart, section, false)?;
                let v = BaseVectorField::new(&objs.chart, comps)
                    .map_err(|e| scn_err(section.line, format!("vector field `{name}`: {e}")))?;
                objs.vectors.insert(name, v);
            }
            SectionKind::OneForm => {
                let comps = build_covector(&objs.chart, section, true)?;
                let w = TensorField::new(&objs.chart, 0, 1, comps, vec![])
                    .map_err(|e| scn_err(section.line, format!("one-form `{name}`: {e}")))?;
                objs.one_forms.insert(name, w);
            }
            SectionKind::SpinorField => {
                let s = build_spinor(&objs.chart, section)?;
                objs.spinors.insert(name, s);
            }
            SectionKind::Lagrangian => {
                let l = build_lagrangian(section)?;
                objs.lagrangians.insert(name, l);
            }
            SectionKind::Task => {
                let index = tasks.len();
                tasks.push(TaskSpec::from_section(section, index)?);
            }
        }
    }
    let mut ids = HashSet::new();
    for t in &tasks {
        if !ids.insert(t.id.clone()) {
            return Err(scn_err(t.line, format!("duplicate task id `{}`", t.id)));
        }
    }
    Ok((objs, tasks))
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct TaskSpec {
    index: usize,
    line: usize,
    id: String,
    op: String,
    args: Vec<(usize, String, String)>,
}

impl TaskSpec {
    fn from_section(section: &Section, index: usize) -> Result<TaskSpec> {
        let mut op = None;
        let mut id = None;
        let mut args = Vec::new();
        for (line, key, value) in &section.entries {
            match key.as_str() {
                "op" => op = Some(value.clone()),
                "id" => id = Some(value.clone()),
                _ => args.push((*line, key.clone(), value.clone())),
            }
        }
        let op = op.ok_or_else(|| scn_err(section.line, "`[task]` needs `op = name`"))?;
        Ok(TaskSpec {
            index,
            line: section.line,
            id: id.unwrap_or_else(|| format!("task{}", index + 1)),
            op,
            args,
        })
    }

    fn optional(&self, key: &str) -> Option<&str> {
        self.args
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.optional(key).ok_or_else(|| {
            scn_err(
                self.line,
                format!("operation `{}` needs `{key} = …`", self.op),
            )
        })
    }

    fn optional_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.optional(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                scn_err(self.line, format!("`{key}` must be an integer, found `{v}`"))
            }),
        }
    }

    fn optional_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.optional(key) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(v) => Err(scn_err(
                self.line,
                format!("`{key}` must be `true` or `false`, found `{v}`"),
            )),
        }
    }

    /// Reject argument keys the operation does not understand.
    fn allow(&self, keys: &[&str]) -> Result<()> {
        for (line, key, _) in &self.args {
            if !keys.contains(&key.as_str()) && key != "samples" {
                return Err(scn_err(
                    *line,
                    format!("unknown key `{key}` for operation `{}`", self.op),
                ));
            }
        }
        Ok(())
    }

    fn zero_cfg(&self, run: &RunCfg) -> Result<ZeroCfg> {
        let samples = self.optional_usize("samples")?.unwrap_or(run.samples);
        let seed = run
            .seed
            .wrapping_add((self.index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        Ok(ZeroCfg::with_samples(samples).seed(seed))
    }
}

/// Push the nonzero components of a flat index table as text items.
fn push_components(
    items: &mut Vec<ReportItem>,
    label: &str,
    dims: &[usize],
    get: impl Fn(&[usize]) -> Expr,
) {
    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; dims.len()];
    let mut nonzero = 0usize;
    let mut lines = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        for (k, &d) in dims.iter().enumerate().rev() {
            idx[k] = rem % d;
            rem /= d;
        }
        let e = get(&idx);
        if !e.is_zero_literal() {
            nonzero += 1;
            let suffix: String = idx.iter().map(|i| format!("[{i}]")).collect();
            lines.push(ReportItem::Text {
                name: format!("{label}{suffix}"),
                value: e.to_string(),
            });
        }
    }
    items.push(ReportItem::Text {
        name: "nonzero components".into(),
        value: format!("{nonzero} of {total}"),
    });
    items.extend(lines);
}

/// Combine zero tests over a set of expressions into one verdict.
fn zero_all(exprs: &[Expr], cfg: &ZeroCfg) -> Result<Verdict> {
    let mut verdict = Verdict::ProvenZero;
    for e in exprs {
        verdict = verdict.combine(is_zero(e, cfg)?);
        if !verdict.is_zero() {
            break;
        }
    }
    Ok(verdict)
}

fn extend_with_check_report(items: &mut Vec<ReportItem>, report: CheckReport) {
    for check in report.checks {
        items.push(ReportItem::Check {
            name: check.name,
            verdict: check.verdict,
        });
    }
}

/// Either a section-defined Lagrangian or a freshly built built-in one.
enum LagRef<'a> {
    Borrowed(&'a LagrangianDensity),
    Owned(LagrangianDensity),
}

impl LagRef<'_> {
    fn get(&self) -> &LagrangianDensity {
        match self {
            LagRef::Borrowed(l) => l,
            LagRef::Owned(l) => l,
        }
    }
}

fn resolve_lagrangian<'a>(objs: &'a Objects, spec: &TaskSpec) -> Result<LagRef<'a>> {
    let name = spec.require("lagrangian")?;
    if let Some(l) = objs.lagrangians.get(name) {
        return Ok(LagRef::Borrowed(l));
    }
    let builder: fn(&JetContext) -> LagrangianDensity = match name {
        "hilbert_einstein" => hilbert_einstein,
        "yang_mills" => yang_mills,
        other => {
            return Err(match objs.kinds.get(other) {
                Some(kind) => scn_err(
                    spec.line,
                    format!("`{other}` is a {kind}, but a lagrangian is required"),
                ),
                None => scn_err(
                    spec.line,
                    format!(
                        "no lagrangian named `{other}` (built-ins: `hilbert_einstein`, \
                         `yang_mills`)"
                    ),
                ),
            })
        }
    };
    let dim = spec.optional_usize("dim")?.ok_or_else(|| {
        scn_err(
            spec.line,
            format!("built-in lagrangian `{name}` needs `dim = n`"),
        )
    })?;
    let ctx = JetContext::new(dim).map_err(|e| scn_err(spec.line, e.to_string()))?;
    Ok(LagRef::Owned(builder(&ctx)))
}

/// Resolve the connection argument: an explicit `connection`, or the
/// Levi-Civita connection of `metric` when only the metric is given.
fn resolve_connection(objs: &Objects, spec: &TaskSpec) -> Result<WorldConnection> {
    if let Some(name) = spec.optional("connection") {
        return objs
            .lookup(&objs.connections, "connection", name, spec.line)
            .cloned();
    }
    if let Some(name) = spec.optional("metric") {
        let g = objs.lookup(&objs.metrics, "metric", name, spec.line)?;
        return christoffel(g);
    }
    Err(scn_err(
        spec.line,
        format!("operation `{}` needs `connection = …` or `metric = …`", spec.op),
    ))
}

fn run_task(objs: &Objects, spec: &TaskSpec, run: &RunCfg) -> Result<Vec<ReportItem>> {
    let cfg = spec.zero_cfg(run)?;
    let chart = &objs.chart;
    let dim = chart.dim();
    let mut items = Vec::new();
    match spec.op.as_str() {
        "christoffel" => {
            spec.allow(&["metric"])?;
            let g = objs.lookup(&objs.metrics, "metric", spec.require("metric")?, spec.line)?;
            let gamma = christoffel(g)?;
            push_components(&mut items, "Gamma", &[dim, dim, dim], |i| {
                gamma.get(i[0], i[1], i[2]).clone()
            });
        }
        "curvature" => {
            spec.allow(&["connection", "metric"])?;
            let gamma = resolve_connection(objs, spec)?;
            let r = curvature(&gamma);
            push_components(&mut items, "R", &[dim, dim, dim, dim], |i| {
                r.get(i).cloned().unwrap_or_else(|_| Expr::zero())
            });
        }
        "ricci" => {
            spec.allow(&["connection", "metric"])?;
            let gamma = resolve_connection(objs, spec)?;
            let pair = ricci(&gamma);
            push_components(&mut items, "Ric", &[dim, dim], |i| {
                pair.plain.get(i).cloned().unwrap_or_else(|_| Expr::zero())
            });
        }
        "scalar_curvature" => {
            spec.allow(&["metric", "connection", "expect"])?;
            let g = objs.lookup(&objs.metrics, "metric", spec.require("metric")?, spec.line)?;
            let gamma = resolve_connection(objs, spec)?;
            let r = scalar_curvature(&gamma, g)?;
            items.push(ReportItem::Text {
                name: "scalar curvature".into(),
                value: r.to_string(),
            });
            let (name, expect) = match spec.optional("expect") {
                Some(text) => (
                    "matches the expected value",
                    parse_expr(chart, spec.line, "expect", text)?,
                ),
                None => ("vanishes", Expr::zero()),
            };
            items.push(ReportItem::Check {
                name: name.into(),
                verdict: is_zero(&r.sub(&expect), &cfg)?,
            });
        }
        "torsion" => {
            spec.allow(&["connection", "metric", "expect_zero"])?;
            let gamma = resolve_connection(objs, spec)?;
            let t = torsion(&gamma);
            push_components(&mut items, "T", &[dim, dim, dim], |i| {
                t.get(i).cloned().unwrap_or_else(|_| Expr::zero())
            });
            if spec.optional_bool("expect_zero")?.unwrap_or(false) {
                items.push(ReportItem::Check {
                    name: "torsion vanishes".into(),
                    verdict: zero_all(t.components(), &cfg)?,
                });
            }
        }
        "nonmetricity" => {
            spec.allow(&["connection", "metric", "expect_zero"])?;
            let g = objs.lookup(&objs.metrics, "metric", spec.require("metric")?, spec.line)?;
            let gamma = resolve_connection(objs, spec)?;
            let q = nonmetricity(&gamma, g)?;
            push_components(&mut items, "Q", &[dim, dim, dim], |i| {
                q.get(i).cloned().unwrap_or_else(|_| Expr::zero())
            });
            if spec.optional_bool("expect_zero")?.unwrap_or(false) {
                items.push(ReportItem::Check {
                    name: "nonmetricity vanishes".into(),
                    verdict: zero_all(q.components(), &cfg)?,
                });
            }
        }
        "levi_civita_check" => {
            spec.allow(&["metric"])?;
            let g = objs.lookup(&objs.metrics, "metric", spec.require("metric")?, spec.line)?;
            let gamma = christoffel(g)?;
            let t = torsion(&gamma);
            items.push(ReportItem::Check {
                name: "torsion of the metric connection vanishes".into(),
                verdict: zero_all(t.components(), &cfg)?,
            });
            let q = nonmetricity(&gamma, g)?;
            items.push(ReportItem::Check {
                name: "nonmetricity of the metric connection vanishes".into(),
                verdict: zero_all(q.components(), &cfg)?,
            });
        }
        "splitting_round_trip" => {
            spec.allow(&["connection", "metric"])?;
            let g = objs.lookup(&objs.metrics, "metric", spec.require("metric")?, spec.line)?;
            let gamma = match spec.optional("connection") {
                Some(name) => objs.lookup(&objs.connections, "connection", name, spec.line)?.clone(),
                None => christoffel(g)?,
            };
            let parts = decompose(&gamma, g)?;
            let back = parts.recompose(g)?;
            let diff = gamma.sub(&back)?;
            items.push(ReportItem::Check {
                name: "decomposition recomposes to the connection".into(),
                verdict: zero_all(diff.coeffs(), &cfg)?,
            });
        }
        "lift_bracket_check" => {
            spec.allow(&["kind", "u", "v"])?;
            let kind = spec.require("kind")?;
            let u = objs.lookup(&objs.vectors, "vector-field", spec.require("u")?, spec.line)?;
            let v = objs.lookup(&objs.vectors, "vector-field", spec.require("v")?, spec.line)?;
            let lift: fn(&BaseVectorField) -> Result<LiftedVectorField> = match kind {
                "tangent" => |t| lift_tensor(t, 1, 0),
                "cotangent" => |t| lift_tensor(t, 0, 1),
                "frame" => lift_frame,
                "connection" => lift_connection_bundle,
                "metric" => lift_sigma_c,
                other => {
                    return Err(scn_err(
                        spec.line,
                        format!(
                            "unknown lift kind `{other}` (expected tangent, cotangent, frame, \
                             connection or metric)"
                        ),
                    ))
                }
            };
            let lhs = lift(u)?.bracket(&lift(v)?)?;
            let rhs = lift(&u.bracket(v)?)?;
            items.push(ReportItem::Check {
                name: format!("{kind} lift commutes with the bracket"),
                verdict: lhs.difference(&rhs)?.is_zero(&cfg)?,
            });
        }
        "metric_from_tetrad" => {
            spec.allow(&["tetrad"])?;
            let h = objs.lookup(&objs.tetrads, "tetrad", spec.require("tetrad")?, spec.line)?;
            let g = metric_from_tetrad(h)?;
            push_components(&mut items, "g", &[dim, dim], |i| {
                g.dn(i[0], i[1]).clone()
            });
        }
        "spin_connection" => {
            spec.allow(&["tetrad", "connection", "metric"])?;
            let h = objs.lookup(&objs.tetrads, "tetrad", spec.require("tetrad")?, spec.line)?;
            let gamma = resolve_connection(objs, spec)?;
            let omega = spinor::spin_connection(&gamma, h)?;
            push_components(&mut items, "Omega", &[dim, dim, dim], |i| {
                omega.get(i[0], i[1], i[2]).clone()
            });
        }
        "dirac" => {
            spec.allow(&["tetrad", "connection", "metric", "spinor"])?;
            let h = objs.lookup(&objs.tetrads, "tetrad", spec.require("tetrad")?, spec.line)?;
            let gamma = resolve_connection(objs, spec)?;
            let psi = objs.lookup(&objs.spinors, "spinor-field", spec.require("spinor")?, spec.line)?;
            let dpsi = spinor::dirac_operator(&gamma, h, psi)?;
            for (k, comp) in dpsi.comps().iter().enumerate() {
                items.push(ReportItem::Text {
                    name: format!("Dpsi[{k}]"),
                    value: complex_string(comp),
                });
            }
        }
        "field_equations" => {
            spec.allow(&["dim"])?;
            let d = spec.optional_usize("dim")?.unwrap_or(dim);
            extend_with_check_report(&mut items, identities::field_equations_he(d, &cfg)?);
        }
        "invariance_identities" => {
            spec.allow(&["lagrangian", "dim"])?;
            let l = resolve_lagrangian(objs, spec)?;
            extend_with_check_report(&mut items, identities::invariance_identities(l.get(), &cfg)?);
        }
        "noether_identities" => {
            spec.allow(&["lagrangian", "dim"])?;
            let l = resolve_lagrangian(objs, spec)?;
            extend_with_check_report(&mut items, identities::noether_identities(l.get(), &cfg)?);
        }
        "energy_momentum_check" => {
            spec.allow(&["lagrangian", "dim", "sampler"])?;
            let l = resolve_lagrangian(objs, spec)?;
            let sampler = match spec.optional("sampler") {
                None | Some("linear-solve") => OnShellSampler::LinearSolve,
                Some("zero-curvature") => OnShellSampler::ZeroCurvature,
                Some(other) => {
                    return Err(scn_err(
                        spec.line,
                        format!(
                            "unknown sampler `{other}` (expected linear-solve or zero-curvature)"
                        ),
                    ))
                }
            };
            extend_with_check_report(
                &mut items,
                identities::energy_momentum_report(l.get(), sampler, &cfg)?,
            );
        }
        "superpotential_check" => {
            spec.allow(&["lagrangian", "dim", "compare_classical"])?;
            let l = resolve_lagrangian(objs, spec)?;
            let compare = spec.optional_bool("compare_classical")?.unwrap_or(false);
            extend_with_check_report(&mut items, identities::komar_report(l.get(), compare, &cfg)?);
        }
        "nilpotency_check" => {
            spec.allow(&["dim"])?;
            let d = spec.optional_usize("dim")?.unwrap_or(2);
            let ctx = JetContext::new(d).map_err(|e| scn_err(spec.line, e.to_string()))?;
            extend_with_check_report(&mut items, brst::nilpotency_check(&ctx)?);
        }
        "clifford_check" => {
            spec.allow(&[])?;
            let rep = spinor::gamma_basis();
            items.push(ReportItem::Check {
                name: "gamma anticommutators match the frame metric".into(),
                verdict: clifford_verdict(&rep),
            });
        }
        "zero_test" => {
            spec.allow(&["expr"])?;
            let e = parse_expr(chart, spec.line, "expr", spec.require("expr")?)?;
            items.push(ReportItem::Check {
                name: "expression vanishes".into(),
                verdict: is_zero(&e, &cfg)?,
            });
        }
        other => {
            return Err(scn_err(spec.line, format!("unknown operation `{other}`")));
        }
    }
    Ok(items)
}

fn complex_string(c: &CExpr) -> String {
    match (c.re.is_zero_literal(), c.im.is_zero_literal()) {
        (true, true) => "0".to_string(),
        (false, true) => c.re.to_string(),
        (true, false) => format!("i*({})", c.im),
        (false, false) => format!("({}) + i*({})", c.re, c.im),
    }
}

/// Exact verdict over all sixteen anticommutator defects of a gamma basis.
fn clifford_verdict(rep: &spinor::GammaRep) -> Verdict {
    for a in 0..spinor::DIM {
        for b in 0..spinor::DIM {
            let defect = rep.clifford_defect(a, b);
            for r in 0..spinor::DIM {
                for c in 0..spinor::DIM {
                    let entry = defect.get(r, c);
                    if !entry.is_zero() {
                        let part = if !entry.re.is_zero() {
                            entry.re.clone()
                        } else {
                            entry.im.clone()
                        };
                        return Verdict::Nonzero {
                            witness: Vec::new(),
                            value: WitnessValue::Exact(part),
                        };
                    }
                }
            }
        }
    }
    Verdict::ProvenZero
}

fn finish_record(id: &str, op: &str, started: Instant, outcome: Result<Vec<ReportItem>>) -> TaskRecord {
    let (status, items) = match outcome {
        Ok(items) => {
            let ok = items.iter().all(|item| match item {
                ReportItem::Check { verdict, .. } => verdict.is_zero(),
                ReportItem::Text { .. } => true,
            });
            (
                if ok { TaskStatus::Ok } else { TaskStatus::Failed },
                items,
            )
        }
        Err(e) => (TaskStatus::Errored(e.to_string()), Vec::new()),
    };
    TaskRecord {
        id: id.to_string(),
        op: op.to_string(),
        status,
        items,
        wall: started.elapsed(),
    }
}

/// Execute a scenario.  Object-construction and syntax problems surface as
/// `Err`; problems inside a task (unknown operation, missing object, a check
/// that fails) are recorded in the returned report instead.
pub fn run(scenario: &Scenario, cfg: &RunCfg) -> Result<Report> {
    let (objects, tasks) = build_objects(&scenario.sections)?;
    let exec = |spec: &TaskSpec| {
        let started = Instant::now();
        let outcome = run_task(&objects, spec, cfg);
        finish_record(&spec.id, &spec.op, started, outcome)
    };
    let records: Vec<TaskRecord> = if cfg.serial {
        tasks.iter().map(exec).collect()
    } else {
        tasks.par_iter().map(exec).collect()
    };
    Ok(Report {
        title: scenario.title.clone(),
        records,
    })
}

// ---------------------------------------------------------------------------
// Self-check suite
// ---------------------------------------------------------------------------

/// Options for [`selfcheck`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SelfcheckCfg {
    /// Deliberately perturb one gamma-matrix entry so the Clifford check
    /// fails; a negative control proving the suite can detect wrong inputs.
    pub tamper_gamma: bool,
}

fn selfcheck_record(
    id: &str,
    f: impl FnOnce(&mut Vec<ReportItem>) -> Result<()>,
) -> TaskRecord {
    let started = Instant::now();
    let mut items = Vec::new();
    let outcome = f(&mut items).map(|()| items);
    finish_record(id, "selfcheck", started, outcome)
}

/// Run the built-in verification suite: the connection-splitting round trip,
/// the momentum antisymmetry and velocity-derivative identities of the two
/// built-in Lagrangians, the translation (Noether) identities of the
/// gravitational Lagrangian, nilpotency of the extended gauge operator, and
/// the Clifford relations of the gamma basis.
pub fn selfcheck(cfg: &SelfcheckCfg) -> Result<Report> {
    let zcfg = ZeroCfg::default();
    let mut records = Vec::new();

    records.push(selfcheck_record("splitting-round-trip", |items| {
        let chart = Chart::new(3)?;
        let mut rng = corpus::rng(0xA5);
        let g = corpus::random_metric(&chart, Signature::Lorentzian, &mut rng)?;
        let gamma = corpus::random_connection(&chart, &mut rng);
        let parts = decompose(&gamma, &g)?;
        let diff = gamma.sub(&parts.recompose(&g)?)?;
        items.push(ReportItem::Check {
            name: "splitting recomposes a random connection (dim 3)".into(),
            verdict: zero_all(diff.coeffs(), &zcfg)?,
        });
        Ok(())
    }));

    records.push(selfcheck_record("momentum-antisymmetry", |items| {
        let ctx = JetContext::new(2)?;
        for l in [hilbert_einstein(&ctx), yang_mills(&ctx)] {
            let mut diffs = Vec::new();
            for lam in 0..2 {
                for nu in 0..2 {
                    for a in 0..2 {
                        for b in 0..2 {
                            diffs.push(l.momentum(lam, nu, a, b).add(&l.momentum(nu, lam, a, b)));
                        }
                    }
                }
            }
            items.push(ReportItem::Check {
                name: format!("`{}` momenta are antisymmetric", l.label()),
                verdict: zero_all(&diffs, &zcfg)?,
            });
        }
        Ok(())
    }));

    records.push(selfcheck_record("velocity-identity", |items| {
        let ctx = JetContext::new(2)?;
        for l in [hilbert_einstein(&ctx), yang_mills(&ctx)] {
            let mut diffs = Vec::new();
            for nu in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let lhs = ctx.connection_partial(l.density(), nu, a, b);
                        let mut rhs = Vec::new();
                        for lam in 0..2 {
                            for s in 0..2 {
                                rhs.push(l.momentum(lam, nu, a, s).mul(&ctx.connection(lam, b, s)));
                                rhs.push(
                                    l.momentum(lam, nu, s, b)
                                        .mul(&ctx.connection(lam, s, a))
                                        .neg(),
                                );
                            }
                        }
                        diffs.push(lhs.sub(&Expr::sum(rhs)));
                    }
                }
            }
            items.push(ReportItem::Check {
                name: format!(
                    "`{}` velocity derivative matches the momentum bilinear",
                    l.label()
                ),
                verdict: zero_all(&diffs, &zcfg)?,
            });
        }
        Ok(())
    }));

    records.push(selfcheck_record("translation-identities", |items| {
        let ctx = JetContext::new(2)?;
        let l = hilbert_einstein(&ctx);
        extend_with_check_report(items, identities::noether_identities(&l, &zcfg)?);
        Ok(())
    }));

    records.push(selfcheck_record("gauge-nilpotency", |items| {
        let ctx = JetContext::new(2)?;
        extend_with_check_report(items, brst::nilpotency_check(&ctx)?);
        Ok(())
    }));

    let tamper = cfg.tamper_gamma;
    records.push(selfcheck_record("clifford-relations", move |items| {
        let rep = if tamper {
            spinor::tampered_gamma_basis()
        } else {
            spinor::gamma_basis()
        };
        items.push(ReportItem::Check {
            name: "gamma anticommutators match the frame metric".into(),
            verdict: clifford_verdict(&rep),
        });
        Ok(())
    }));

    Ok(Report {
        title: "selfcheck".to_string(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINKOWSKI: &str = "\
[chart]
dim = 4

[metric g]
diag = 1, -1, -1, -1

[task]
op = christoffel
metric = g
";

    #[test]
    fn minkowski_christoffel_is_all_zero_and_passes() {
        let sc = Scenario::parse(MINKOWSKI, "minkowski").unwrap();
        let report = run(&sc, &RunCfg::default()).unwrap();
        assert!(report.passed());
        let text = report.render_text();
        assert!(text.contains("nonzero components = 0 of 64"), "{text}");
        assert!(text.contains("summary: 1 tasks, 0 failed, 0 errored"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "[chart]\ndim = 4\nnot an assignment\n";
        match Scenario::parse(bad, "bad") {
            Err(Error::Scenario { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a scenario error, got {other:?}"),
        }
        let dup = "[metric g]\n00 = 1\n[metric g]\n";
        match Scenario::parse(dup, "dup") {
            Err(Error::Scenario { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("duplicate object name"));
            }
            other => panic!("expected a scenario error, got {other:?}"),
        }
        let expr = "[chart]\ndim = 2\n[metric g]\ndiag = 1, x0 +\n";
        match Scenario::parse(expr, "expr").map(|sc| run(&sc, &RunCfg::default())) {
            Ok(Err(Error::Scenario { line, .. })) => assert_eq!(line, 4),
            other => panic!("expected a scenario error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_operation_and_type_mismatch_are_reported_not_fatal() {
        let text = "\
[chart]
dim = 2

[metric g]
diag = 1, -1

[task]
op = frobnicate

[task]
op = christoffel
metric = h

[task]
op = curvature
connection = g
";
        let sc = Scenario::parse(text, "mixed").unwrap();
        let report = run(&sc, &RunCfg::default()).unwrap();
        assert!(!report.passed());
        let errors: Vec<String> = report
            .records
            .iter()
            .map(|r| match &r.status {
                TaskStatus::Errored(m) => m.clone(),
                other => panic!("expected an error status, got {other:?}"),
            })
            .collect();
        assert!(errors[0].contains("unknown operation `frobnicate`"));
        assert!(errors[1].contains("no metric named `h`"));
        assert!(errors[2].contains("`g` is a metric, but a connection is required"));
    }

    #[test]
    fn empty_scenario_produces_an_empty_passing_report() {
        let sc = Scenario::parse("# nothing here\n", "empty").unwrap();
        assert!(sc.is_empty());
        let report = run(&sc, &RunCfg::default()).unwrap();
        assert!(report.passed());
        assert!(report.records.is_empty());
        assert!(report.render_text().contains("summary: 0 tasks"));
    }

    #[test]
    fn reports_are_byte_identical_across_runs_and_modes() {
        let text = "\
[chart]
dim = 2

[metric g]
signature = riemannian
diag = 1, sin(x0)^2

[task]
op = scalar_curvature
metric = g
expect = -2

[task]
op = levi_civita_check
metric = g

[task]
op = zero_test
expr = sin(x0)^2 + cos(x0)^2 - 1
";
        let sc = Scenario::parse(text, "sphere").unwrap();
        let parallel = run(&sc, &RunCfg::default()).unwrap();
        assert!(parallel.passed(), "{}", parallel.render_text());
        let again = run(&sc, &RunCfg::default()).unwrap();
        let serial = run(
            &sc,
            &RunCfg {
                serial: true,
                ..RunCfg::default()
            },
        )
        .unwrap();
        assert_eq!(parallel.render_text(), again.render_text());
        assert_eq!(parallel.render_json(), again.render_json());
        assert_eq!(parallel.render_text(), serial.render_text());
        assert_eq!(parallel.render_json(), serial.render_json());
        let other_seed = run(
            &sc,
            &RunCfg {
                seed: 99,
                ..RunCfg::default()
            },
        )
        .unwrap();
        assert!(other_seed.passed());
    }

    #[test]
    fn failing_check_yields_failed_status_with_witness() {
        let text = "\
[lagrangian broken]
dim = 2
density = k000^2

[task]
op = noether_identities
lagrangian = broken
";
        let sc = Scenario::parse(text, "broken").unwrap();
        let report = run(&sc, &RunCfg::default()).unwrap();
        assert!(!report.passed());
        assert_eq!(report.records[0].status, TaskStatus::Failed);
        let json = report.render_json();
        assert!(json.contains("\"state\": \"nonzero\""), "{json}");
        assert!(json.contains("\"witness\""));
    }

    #[test]
    fn dirac_and_spinor_sections_run() {
        let text = "\
[chart]
dim = 4

[tetrad h]
diag = 1, 1, 1, 1

[connection zero]

[spinor-field psi]
re0 = x1
im2 = x0

[task]
op = dirac
tetrad = h
connection = zero
spinor = psi
";
        let sc = Scenario::parse(text, "dirac").unwrap();
        let report = run(&sc, &RunCfg::default()).unwrap();
        assert!(report.passed(), "{}", report.render_text());
        let text = report.render_text();
        assert!(text.contains("Dpsi[0]"), "{text}");
    }

    #[test]
    fn lift_bracket_tasks_pass_for_polynomial_fields() {
        let text = "\
[chart]
dim = 2

[vector-field u]
0 = x0*x1
1 = x1

[vector-field v]
0 = x1
1 = x0^2

[task]
op = lift_bracket_check
kind = tangent
u = u
v = v

[task]
op = lift_bracket_check
kind = connection
u = u
v = v
";
        let sc = Scenario::parse(text, "lifts").unwrap();
        let report = run(&sc, &RunCfg::default()).unwrap();
        assert!(report.passed(), "{}", report.render_text());
    }

    #[test]
    fn selfcheck_passes_and_tampered_gammas_fail() {
        let good = selfcheck(&SelfcheckCfg::default()).unwrap();
        assert!(good.passed(), "{}", good.render_text());
        assert_eq!(good.records.len(), 6);
        let bad = selfcheck(&SelfcheckCfg { tamper_gamma: true }).unwrap();
        assert!(!bad.passed());
        let failed: Vec<&str> = bad
            .records
            .iter()
            .filter(|r| r.status != TaskStatus::Ok)
            .map(|r| r.id.as_str())
            .collect();
        assert_eq!(failed, ["clifford-relations"]);
    }

    #[test]
    fn chart_must_precede_objects() {
        let text = "[metric g]\ndiag = 1, -1\n";
        let sc = Scenario::parse(text, "late").unwrap();
        match run(&sc, &RunCfg::default()) {
            Err(Error::Scenario { line, msg }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("`[chart]`"));
            }
            other => panic!("expected a scenario error, got {other:?}"),
        }
    }
}
