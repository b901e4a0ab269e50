//! Automated dataset filtering: completeness, structural limits,
//! signature-based deduplication and executability bookkeeping.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scalar::{format_decimal, Scalar};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Quantitative,
    Date,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Categorical => "categorical",
            ColumnKind::Quantitative => "quantitative",
            ColumnKind::Date => "date",
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All numeric -> quantitative; all ISO dates -> date; else categorical.
pub fn column_kind(values: &[Scalar]) -> ColumnKind {
    if values.is_empty() {
        return ColumnKind::Categorical;
    }
    if values.iter().all(|v| v.to_number().is_some()) {
        ColumnKind::Quantitative
    } else if values.iter().all(|v| matches!(v, Scalar::Date(_))) {
        ColumnKind::Date
    } else {
        ColumnKind::Categorical
    }
}

fn representative(kind: ColumnKind, values: &[Scalar]) -> String {
    match kind {
        ColumnKind::Quantitative => {
            // Summed in sorted order so row order cannot change the last digit.
            let mut nums: Vec<f64> = values.iter().filter_map(Scalar::to_number).collect();
            nums.sort_by(f64::total_cmp);
            let sum: f64 = nums.iter().sum();
            format_decimal(sum / values.len() as f64)
        }
        ColumnKind::Categorical | ColumnKind::Date => {
            // Highest count; ties go to the value seen first.
            let mut counts: Vec<(String, usize)> = Vec::new();
            let mut index: HashMap<String, usize> = HashMap::new();
            for v in values {
                let key = v.to_string();
                match index.get(&key) {
                    Some(&i) => counts[i].1 += 1,
                    None => {
                        index.insert(key.clone(), counts.len());
                        counts.push((key, 1));
                    }
                }
            }
            let best = counts.iter().map(|c| c.1).max().unwrap_or(0);
            counts.into_iter().find(|c| c.1 == best).map(|c| c.0).unwrap_or_default()
        }
    }
}

/// Column-level `(kind, length, representative)` features.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableSignature {
    /// `kind|length|representative` per column, joined with `;`.
    pub canonical: String,
    /// Undelimited concatenation; ambiguous, kept for compatibility only.
    pub compat: String,
}

pub fn table_signature(t: &Table) -> TableSignature {
    let mut canonical = Vec::with_capacity(t.headers.len());
    let mut compat = String::new();
    for k in 0..t.headers.len() {
        let values = t.column(k);
        let kind = column_kind(&values);
        let rep = representative(kind, &values);
        canonical.push(format!("{}|{}|{}", kind, values.len(), rep));
        compat.push_str(&format!("{}{}{}", kind, values.len(), rep));
    }
    TableSignature { canonical: canonical.join(";"), compat }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecOutcome {
    Ok,
    ExecError,
    Timeout,
    EmptyFigure,
}

/// The executor's `status.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecStatus {
    pub outcome: ExecOutcome,
    #[serde(default)]
    pub stderr_tail: String,
    #[serde(default)]
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Completeness,
    Structural,
    Deduplication,
    Executability,
}

impl Stage {
    pub const ORDER: [Stage; 4] = [Stage::Completeness, Stage::Structural, Stage::Deduplication, Stage::Executability];
}

/// One chart / table / script triple as listed in a manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub id: String,
    pub table: PathBuf,
    pub figure: PathBuf,
    pub script: PathBuf,
    /// Script length; computed from the file when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_char_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec_status: Option<ExecOutcome>,
    /// Path to an executor `status.json`, used when `exec_status` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec_status_path: Option<PathBuf>,
    /// Last stage passed; `None` until filtering runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<Stage>,
}

impl TripleRecord {
    pub fn new(id: impl Into<String>, table: PathBuf, figure: PathBuf, script: PathBuf) -> Self {
        TripleRecord {
            id: id.into(),
            table,
            figure,
            script,
            code_char_count: None,
            exec_status: None,
            exec_status_path: None,
            passed: None,
        }
    }

    /// Resolve relative paths against `base`.
    pub fn rebase(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.table);
        fix(&mut self.figure);
        fix(&mut self.script);
        if let Some(p) = self.exec_status_path.as_mut() {
            fix(p);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub id: String,
    pub reason: String,
    /// For duplicates, the record that was kept.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retained_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupResult {
    pub retained: Vec<TripleRecord>,
    pub removed: Vec<Removal>,
}

/// Keep the first record per canonical signature, in input order.
///
/// `signature` yields `None` for records whose table cannot be loaded;
/// those are retained untouched.
pub fn dedup_by<F>(records: Vec<TripleRecord>, mut signature: F) -> DedupResult
where
    F: FnMut(&TripleRecord) -> Option<TableSignature>,
{
    let mut seen: HashMap<String, String> = HashMap::new();
    let mut retained = Vec::new();
    let mut removed = Vec::new();
    for rec in records {
        let Some(sig) = signature(&rec) else {
            retained.push(rec);
            continue;
        };
        match seen.get(&sig.canonical) {
            Some(first) => removed.push(Removal {
                id: rec.id.clone(),
                reason: "duplicate table signature".into(),
                retained_id: Some(first.clone()),
            }),
            None => {
                seen.insert(sig.canonical, rec.id.clone());
                retained.push(rec);
            }
        }
    }
    DedupResult { retained, removed }
}

/// Deduplicate by the signature of each record's table file.
pub fn dedup(records: Vec<TripleRecord>) -> DedupResult {
    dedup_by(records, |r| Table::load_csv(&r.table).ok().map(|t| table_signature(&t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterLimits {
    pub max_code_chars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub input: usize,
    pub removed: usize,
    pub retained: usize,
    /// Executability only: no record carried a status, so nothing was checked.
    pub skipped: bool,
    /// Records passed through without a status.
    pub unchecked: usize,
    pub removals: Vec<Removal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub stages: Vec<StageReport>,
    pub retained: Vec<TripleRecord>,
}

impl FilterReport {
    pub fn total_removed(&self) -> usize {
        self.stages.iter().map(|s| s.removed).sum()
    }
}

fn non_empty_file(p: &Path) -> bool {
    std::fs::metadata(p).map(|m| m.is_file() && m.len() > 0).unwrap_or(false)
}

fn completeness_problem(r: &TripleRecord) -> Option<String> {
    for (label, p) in [("table", &r.table), ("figure", &r.figure), ("script", &r.script)] {
        if !non_empty_file(p) {
            return Some(format!("{label} missing or empty: {}", p.display()));
        }
    }
    match Table::load_csv(&r.table) {
        Ok(t) if t.rows.is_empty() => Some("table has no rows".into()),
        Ok(_) => None,
        Err(e) => Some(format!("table unreadable: {e}")),
    }
}

fn code_chars(r: &TripleRecord) -> Option<usize> {
    r.code_char_count
        .or_else(|| std::fs::read_to_string(&r.script).ok().map(|s| s.chars().count()))
}

fn exec_outcome(r: &TripleRecord) -> Option<ExecOutcome> {
    r.exec_status.or_else(|| {
        let p = r.exec_status_path.as_ref()?;
        let text = std::fs::read_to_string(p).ok()?;
        serde_json::from_str::<ExecStatus>(&text).ok().map(|s| s.outcome)
    })
}

struct StageRun {
    input: usize,
    retained: Vec<TripleRecord>,
    removals: Vec<Removal>,
    unchecked: usize,
}

fn partition<F>(records: Vec<TripleRecord>, stage: Stage, mut verdict: F) -> StageRun
where
    F: FnMut(&TripleRecord) -> Result<bool, String>,
{
    let input = records.len();
    let mut retained = Vec::new();
    let mut removals = Vec::new();
    let mut unchecked = 0;
    for mut r in records {
        match verdict(&r) {
            Ok(checked) => {
                if !checked {
                    unchecked += 1;
                }
                r.passed = Some(stage);
                retained.push(r);
            }
            Err(reason) => removals.push(Removal { id: r.id.clone(), reason, retained_id: None }),
        }
    }
    StageRun { input, retained, removals, unchecked }
}

fn stage_report(stage: Stage, run: &StageRun, skipped: bool) -> StageReport {
    StageReport {
        stage,
        input: run.input,
        removed: run.removals.len(),
        retained: run.retained.len(),
        skipped,
        unchecked: run.unchecked,
        removals: run.removals.clone(),
    }
}

/// Apply the four automated stages in order. Each stage sees only the
/// survivors of the previous one.
pub fn run_filters(records: Vec<TripleRecord>, limits: FilterLimits) -> FilterReport {
    let input = records.len();
    let mut stages = Vec::with_capacity(4);

    let run = partition(records, Stage::Completeness, |r| match completeness_problem(r) {
        None => Ok(true),
        Some(why) => Err(why),
    });
    stages.push(stage_report(Stage::Completeness, &run, false));

    let run = partition(run.retained, Stage::Structural, |r| match code_chars(r) {
        Some(n) if n <= limits.max_code_chars => Ok(true),
        Some(n) => Err(format!("script has {n} characters, limit {}", limits.max_code_chars)),
        None => Err("script unreadable".into()),
    });
    stages.push(stage_report(Stage::Structural, &run, false));

    let dedup_input = run.retained.len();
    let mut deduped = dedup(run.retained);
    for r in &mut deduped.retained {
        r.passed = Some(Stage::Deduplication);
    }
    let run = StageRun { input: dedup_input, retained: deduped.retained, removals: deduped.removed, unchecked: 0 };
    stages.push(stage_report(Stage::Deduplication, &run, false));

    let any_status = run.retained.iter().any(|r| exec_outcome(r).is_some());
    let run = partition(run.retained, Stage::Executability, |r| match exec_outcome(r) {
        Some(ExecOutcome::Ok) => Ok(true),
        Some(other) => Err(format!("executor reported {other:?}")),
        None => Ok(false),
    });
    stages.push(stage_report(Stage::Executability, &run, !any_status));

    FilterReport { input, stages, retained: run.retained }
}
