//! Field comparators, tolerance levels, optimal tuple-set matching and
//! the precision / recall / F1 / IoU family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::assignment;
use crate::extract::{DataTuple, TupleSet};
use crate::scalar::{coerce_number, Scalar};

/// One of the three fixed tolerance regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceLevel {
    Strict,
    Slight,
    High,
}

impl ToleranceLevel {
    pub const ALL: [ToleranceLevel; 3] = [ToleranceLevel::Strict, ToleranceLevel::Slight, ToleranceLevel::High];

    /// Maximum edit distance for string fields.
    pub fn j_max(self) -> usize {
        match self {
            ToleranceLevel::Strict => 0,
            ToleranceLevel::Slight => 3,
            ToleranceLevel::High => 5,
        }
    }

    /// Maximum relative error for numeric fields.
    pub fn e_max(self) -> f64 {
        match self {
            ToleranceLevel::Strict => 0.0,
            ToleranceLevel::Slight => 0.05,
            ToleranceLevel::High => 0.10,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ToleranceLevel::Strict => "strict",
            ToleranceLevel::Slight => "slight",
            ToleranceLevel::High => "high",
        }
    }
}

impl fmt::Display for ToleranceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ToleranceLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(ToleranceLevel::Strict),
            "slight" => Ok(ToleranceLevel::Slight),
            "high" => Ok(ToleranceLevel::High),
            other => Err(format!("unknown tolerance level {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOptions {
    pub case_insensitive: bool,
}

pub fn normalize_text(s: &str, opts: MatchOptions) -> String {
    let nfc: String = s.trim().nfc().collect();
    if opts.case_insensitive {
        nfc.to_lowercase()
    } else {
        nfc
    }
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

/// Relative error of `p` against reference `q`; at `q = 0` this is `|p|`.
pub fn relative_error(p: f64, q: f64) -> f64 {
    if q == 0.0 {
        p.abs()
    } else {
        (p - q).abs() / q.abs()
    }
}

fn numeric_within(p: f64, q: f64, level: ToleranceLevel) -> bool {
    if q == 0.0 {
        p.abs() <= level.e_max()
    } else {
        (p - q).abs() <= level.e_max() * q.abs()
    }
}

/// Compare one predicted field against its reference. Returns the numeric
/// relative error (0 for string fields) when within tolerance.
pub fn compare_fields(p: &Scalar, q: &Scalar, level: ToleranceLevel, opts: MatchOptions) -> Option<f64> {
    match (p, q) {
        (Scalar::Null, _) | (_, Scalar::Null) => None,
        (Scalar::Num(a), Scalar::Num(b)) => numeric_within(*a, *b, level).then(|| relative_error(*a, *b)),
        (Scalar::Num(a), Scalar::Str(t)) => {
            let b = coerce_number(t)?;
            numeric_within(*a, b, level).then(|| relative_error(*a, b))
        }
        (Scalar::Str(t), Scalar::Num(b)) => {
            let a = coerce_number(t)?;
            numeric_within(a, *b, level).then(|| relative_error(a, *b))
        }
        (Scalar::Num(_), Scalar::Date(_)) | (Scalar::Date(_), Scalar::Num(_)) => None,
        (a, b) => {
            let a = normalize_text(a.as_text()?, opts);
            let b = normalize_text(b.as_text()?, opts);
            (edit_distance(&a, &b) <= level.j_max()).then_some(0.0)
        }
    }
}

pub fn field_match(p: &Scalar, q: &Scalar, level: ToleranceLevel) -> bool {
    compare_fields(p, q, level, MatchOptions::default()).is_some()
}

/// Tuples match when arities agree and every field is within tolerance;
/// returns the summed numeric relative error.
pub fn tuple_match(p: &DataTuple, q: &DataTuple, level: ToleranceLevel, opts: MatchOptions) -> Option<f64> {
    if p.arity() != q.arity() {
        return None;
    }
    p.values
        .iter()
        .zip(&q.values)
        .try_fold(0.0, |acc, (a, b)| compare_fields(a, b, level, opts).map(|e| acc + e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub n_m: usize,
    pub n_p: usize,
    pub n_gt: usize,
    /// `(pred index, gt index)` pairs, sorted by pred index.
    pub assignment: Vec<(usize, usize)>,
}

impl MatchResult {
    pub fn counts(n_m: usize, n_p: usize, n_gt: usize) -> Self {
        MatchResult { n_m, n_p, n_gt, assignment: Vec::new() }
    }
}

/// Components with more cells than this fall back to cardinality-only
/// matching without the error tie-break.
const HUNGARIAN_CELL_LIMIT: usize = 250_000;

/// Maximum-cardinality one-to-one matching of predicted to reference
/// tuples. Among maximum matchings, prefers the one with the smallest
/// summed numeric relative error.
pub fn match_tuples(pred: &[DataTuple], gt: &[DataTuple], level: ToleranceLevel, opts: MatchOptions) -> MatchResult {
    let n_p = pred.len();
    let n_gt = gt.len();
    let mut edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_p];
    for (i, p) in pred.iter().enumerate() {
        for (j, q) in gt.iter().enumerate() {
            if let Some(err) = tuple_match(p, q, level, opts) {
                edges[i].push((j, err));
            }
        }
    }

    let mut assignment = Vec::new();
    for (rows, cols) in components(n_p, n_gt, &edges) {
        if rows.len() * cols.len() <= HUNGARIAN_CELL_LIMIT {
            assignment.extend(min_error_matching(&rows, &cols, &edges));
        } else {
            assignment.extend(hopcroft_karp(&rows, n_gt, &edges));
        }
    }
    assignment.sort_unstable();
    MatchResult { n_m: assignment.len(), n_p, n_gt, assignment }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDiagnostic {
    pub pred_arity: usize,
    pub gt_arity: usize,
}

/// Match two tuple sets of one arity. Mismatched arities give `n_m = 0`
/// and a diagnostic.
pub fn match_tuple_sets(pred: &TupleSet, gt: &TupleSet, level: ToleranceLevel) -> (MatchResult, Option<MatchDiagnostic>) {
    let arity = |s: &TupleSet| s.tuples.first().map(DataTuple::arity);
    if let (Some(a), Some(b)) = (arity(pred), arity(gt)) {
        if a != b {
            return (
                MatchResult::counts(0, pred.len(), gt.len()),
                Some(MatchDiagnostic { pred_arity: a, gt_arity: b }),
            );
        }
    }
    (match_tuples(&pred.tuples, &gt.tuples, level, MatchOptions::default()), None)
}

/// Connected components of the compatibility graph that contain at least
/// one edge, as (pred indices, gt indices).
fn components(n_p: usize, n_gt: usize, edges: &[Vec<(usize, f64)>]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut parent: Vec<usize> = (0..n_p + n_gt).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, row) in edges.iter().enumerate() {
        for &(j, _) in row {
            let a = find(&mut parent, i);
            let b = find(&mut parent, n_p + j);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for (i, row) in edges.iter().enumerate() {
        if !row.is_empty() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().0.push(i);
        }
    }
    for j in 0..n_gt {
        let root = find(&mut parent, n_p + j);
        if let Some(g) = groups.get_mut(&root) {
            g.1.push(j);
        }
    }
    groups.into_values().collect()
}

fn min_error_matching(rows: &[usize], cols: &[usize], edges: &[Vec<(usize, f64)>]) -> Vec<(usize, usize)> {
    let col_pos: std::collections::HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    let total_err: f64 = rows.iter().flat_map(|&i| edges[i].iter().map(|e| e.1)).sum();
    // Every compatible pair is worth more than any possible error total,
    // so cardinality is maximized first.
    let reward = total_err + 1.0;
    let mut cost = vec![vec![0.0; cols.len()]; rows.len()];
    for (r, &i) in rows.iter().enumerate() {
        for &(j, err) in &edges[i] {
            cost[r][col_pos[&j]] = err - reward;
        }
    }
    assignment::solve(&cost)
        .pairs
        .into_iter()
        .filter(|&(r, c)| cost[r][c] < 0.0)
        .map(|(r, c)| (rows[r], cols[c]))
        .collect()
}

/// Cardinality-only maximum matching restricted to `rows`.
fn hopcroft_karp(rows: &[usize], n_gt: usize, edges: &[Vec<(usize, f64)>]) -> Vec<(usize, usize)> {
    const NIL: usize = usize::MAX;
    let n = rows.len();
    let adj: Vec<Vec<usize>> = rows.iter().map(|&i| edges[i].iter().map(|e| e.0).collect()).collect();
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n_gt];
    let mut dist = vec![0usize; n];

    loop {
        // BFS layering from free left vertices.
        let mut queue = std::collections::VecDeque::new();
        for u in 0..n {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        // Iterative DFS along layered edges.
        let mut next_edge = vec![0usize; n];
        for start in 0..n {
            if match_l[start] != NIL {
                continue;
            }
            let mut stack = vec![start];
            while let Some(&u) = stack.last() {
                if next_edge[u] >= adj[u].len() {
                    dist[u] = usize::MAX;
                    stack.pop();
                    continue;
                }
                let v = adj[u][next_edge[u]];
                next_edge[u] += 1;
                let w = match_r[v];
                if w == NIL {
                    // Augment along the stack.
                    let mut v = v;
                    while let Some(u) = stack.pop() {
                        let prev = match_l[u];
                        match_l[u] = v;
                        match_r[v] = u;
                        v = prev;
                    }
                    break;
                } else if dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            }
        }
    }
    match_l
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != NIL)
        .map(|(u, &v)| (rows[u], v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
}

impl FidelityMetrics {
    pub const ZERO: FidelityMetrics = FidelityMetrics { precision: 0.0, recall: 0.0, f1: 0.0, iou: 0.0 };
    pub const PERFECT: FidelityMetrics = FidelityMetrics { precision: 1.0, recall: 1.0, f1: 1.0, iou: 1.0 };
}

/// P = n_m/n_p, R = n_m/n_gt, F1 = 2PR/(P+R), IoU = n_m/(n_p+n_gt-n_m).
/// Two empty sides agree vacuously; undefined ratios are 0.
pub fn fidelity_metrics(m: &MatchResult) -> FidelityMetrics {
    if m.n_p == 0 && m.n_gt == 0 {
        return FidelityMetrics::PERFECT;
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(m.n_m, m.n_p);
    let recall = ratio(m.n_m, m.n_gt);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    let iou = ratio(m.n_m, m.n_p + m.n_gt - m.n_m);
    FidelityMetrics { precision, recall, f1, iou }
}

/// Metrics at all three tolerance levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub strict: FidelityMetrics,
    pub slight: FidelityMetrics,
    pub high: FidelityMetrics,
}

impl LevelMetrics {
    pub const ZERO: LevelMetrics =
        LevelMetrics { strict: FidelityMetrics::ZERO, slight: FidelityMetrics::ZERO, high: FidelityMetrics::ZERO };

    pub fn get(&self, level: ToleranceLevel) -> FidelityMetrics {
        match level {
            ToleranceLevel::Strict => self.strict,
            ToleranceLevel::Slight => self.slight,
            ToleranceLevel::High => self.high,
        }
    }

    pub fn evaluate(pred: &[DataTuple], gt: &[DataTuple], opts: MatchOptions) -> Self {
        let at = |level| fidelity_metrics(&match_tuples(pred, gt, level, opts));
        LevelMetrics {
            strict: at(ToleranceLevel::Strict),
            slight: at(ToleranceLevel::Slight),
            high: at(ToleranceLevel::High),
        }
    }
}
