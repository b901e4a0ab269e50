//! Controlled chart-to-table: parsing model-emitted tables under a known
//! header set and scoring them against gold tables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment;
use crate::extract::{DataTuple, TupleSet};
use crate::matching::{edit_distance, LevelMetrics, MatchOptions};
use crate::scalar::Scalar;

/// Largest header edit distance accepted when aligning columns.
pub const HEADER_MAX_EDIT: usize = 3;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("header set must be non-empty with unique entries: {0}")]
    InvalidHeaders(String),
    #[error("no table found in model output")]
    UnparsableTable,
    #[error("only {resolved} of {expected} headers could be aligned")]
    HeaderMismatch { resolved: usize, expected: usize },
    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("reading table {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderSet {
    headers: Vec<String>,
}

impl HeaderSet {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Result<Self, TableError> {
        let headers: Vec<String> = headers.iter().map(|h| h.as_ref().trim().to_string()).collect();
        if headers.is_empty() {
            return Err(TableError::InvalidHeaders("empty".into()));
        }
        for (i, h) in headers.iter().enumerate() {
            if headers[..i].contains(h) {
                return Err(TableError::InvalidHeaders(format!("duplicate {h:?}")));
            }
        }
        Ok(HeaderSet { headers })
    }

    pub fn as_slice(&self) -> &[String] {
        &self.headers
    }

    pub fn len(&self) -> usize {
        self.headers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headers.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub headers: HeaderSet,
    pub rows: Vec<Vec<Scalar>>,
}

impl Table {
    pub fn new(headers: HeaderSet, rows: Vec<Vec<Scalar>>) -> Result<Self, TableError> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != headers.len() {
                return Err(TableError::RaggedRow { row: i, got: r.len(), expected: headers.len() });
            }
        }
        Ok(Table { headers, rows })
    }

    pub fn column(&self, k: usize) -> Vec<Scalar> {
        self.rows.iter().map(|r| r[k].clone()).collect()
    }

    /// Parse CSV text with one header row.
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| TableError::Io { path: String::new(), message: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        let headers = HeaderSet::new(&headers)?;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| TableError::Io { path: String::new(), message: e.to_string() })?;
            rows.push(record.iter().map(Scalar::from_cell).collect());
        }
        Table::new(headers, rows)
    }

    pub fn load_csv(path: &Path) -> Result<Self, TableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TableError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Table::from_csv(&text).map_err(|e| match e {
            TableError::Io { message, .. } => TableError::Io { path: path.display().to_string(), message },
            other => other,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.headers.as_slice()).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(ToString::to_string)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// One tuple per row, fields in header order, with no name field.
pub fn table_to_tuples(t: &Table) -> TupleSet {
    TupleSet::new(None, t.rows.iter().map(|r| DataTuple::new(r.clone())).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableDiagnostic {
    DroppedRow { line: usize, cells: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedTable {
    pub table: Table,
    pub diagnostics: Vec<TableDiagnostic>,
}

/// A contiguous run of delimited lines with their 1-based line numbers.
struct Block {
    rows: Vec<(usize, Vec<String>)>,
}

fn split_markdown_row(line: &str) -> Option<Vec<String>> {
    let t = line.trim();
    if !t.contains('|') {
        return None;
    }
    let t = t.strip_prefix('|').unwrap_or(t);
    let t = t.strip_suffix('|').unwrap_or(t);
    Some(t.split('|').map(|c| c.trim().to_string()).collect())
}

fn is_separator_row(cells: &[String]) -> bool {
    cells.iter().all(|c| {
        let c = c.trim();
        !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' ')) && c.contains('-')
    })
}

fn markdown_blocks(text: &str) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut current: Vec<(usize, Vec<String>)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        match split_markdown_row(line) {
            Some(cells) if !is_separator_row(&cells) => current.push((n + 1, cells)),
            Some(_) => {}
            None => {
                if !current.is_empty() {
                    blocks.push(Block { rows: std::mem::take(&mut current) });
                }
            }
        }
    }
    if !current.is_empty() {
        blocks.push(Block { rows: current });
    }
    blocks
}

fn csv_blocks(text: &str) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut current: Vec<(usize, Vec<String>)> = Vec::new();
    let flush = |current: &mut Vec<(usize, Vec<String>)>, blocks: &mut Vec<Block>| {
        if !current.is_empty() {
            blocks.push(Block { rows: std::mem::take(current) });
        }
    };
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if !t.contains(',') || t.starts_with("```") {
            flush(&mut current, &mut blocks);
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(t.as_bytes());
        match reader.records().next() {
            Some(Ok(rec)) => current.push((n + 1, rec.iter().map(str::to_string).collect())),
            _ => flush(&mut current, &mut blocks),
        }
    }
    flush(&mut current, &mut blocks);
    blocks
}

fn header_key(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Map each expected header to a column of `row`; exact (case-insensitive,
/// trimmed) matches first, then minimum-edit alignment within the limit.
fn align_headers(row: &[String], expected: &HeaderSet) -> Vec<Option<usize>> {
    let keys: Vec<String> = row.iter().map(|c| header_key(c)).collect();
    let mut mapping: Vec<Option<usize>> = vec![None; expected.len()];
    let mut taken = vec![false; row.len()];
    for (h, want) in expected.as_slice().iter().enumerate() {
        let want = header_key(want);
        if let Some(c) = (0..keys.len()).find(|&c| !taken[c] && keys[c] == want) {
            mapping[h] = Some(c);
            taken[c] = true;
        }
    }
    let open_h: Vec<usize> = (0..expected.len()).filter(|&h| mapping[h].is_none()).collect();
    let open_c: Vec<usize> = (0..row.len()).filter(|&c| !taken[c]).collect();
    if open_h.is_empty() || open_c.is_empty() {
        return mapping;
    }
    const FORBIDDEN: f64 = 1e6;
    let cost: Vec<Vec<f64>> = open_h
        .iter()
        .map(|&h| {
            let want = header_key(&expected.as_slice()[h]);
            open_c
                .iter()
                .map(|&c| {
                    let d = edit_distance(&want, &keys[c]);
                    if d <= HEADER_MAX_EDIT {
                        d as f64
                    } else {
                        FORBIDDEN
                    }
                })
                .collect()
        })
        .collect();
    for (i, j) in assignment::solve(&cost).pairs {
        if cost[i][j] < FORBIDDEN {
            mapping[open_h[i]] = Some(open_c[j]);
        }
    }
    mapping
}

/// Parse a model's raw output into a table aligned to `expected`.
///
/// Markdown pipe tables are preferred; comma-separated text is the
/// fallback. Within each candidate block the header row is the row that
/// aligns the most expected headers. Rows whose cell count differs from
/// the header row are dropped.
pub fn parse_model_table(text: &str, expected: &HeaderSet) -> Result<ParsedTable, TableError> {
    let mut candidates = markdown_blocks(text);
    if candidates.is_empty() {
        candidates = csv_blocks(text);
    }
    if candidates.is_empty() {
        return Err(TableError::UnparsableTable);
    }

    // (resolved count, block index, header row index, mapping)
    let mut best: Option<(usize, usize, usize, Vec<Option<usize>>)> = None;
    for (b, block) in candidates.iter().enumerate() {
        for (r, (_, cells)) in block.rows.iter().enumerate() {
            let mapping = align_headers(cells, expected);
            let resolved = mapping.iter().filter(|m| m.is_some()).count();
            if best.as_ref().is_none_or(|(score, ..)| resolved > *score) {
                best = Some((resolved, b, r, mapping));
            }
        }
    }
    let (resolved, b, r, mapping) = best.ok_or(TableError::UnparsableTable)?;
    if resolved < expected.len() {
        return Err(TableError::HeaderMismatch { resolved, expected: expected.len() });
    }
    let mapping: Vec<usize> = mapping.into_iter().map(|m| m.expect("all resolved")).collect();

    let block = &candidates[b];
    let width = block.rows[r].1.len();
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (line, cells) in &block.rows[r + 1..] {
        if cells.len() != width {
            diagnostics.push(TableDiagnostic::DroppedRow { line: *line, cells: cells.len(), expected: width });
            continue;
        }
        rows.push(mapping.iter().map(|&c| Scalar::from_cell(&cells[c])).collect());
    }
    Ok(ParsedTable { table: Table::new(expected.clone(), rows)?, diagnostics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEvaluation {
    pub pass: bool,
    pub metrics: LevelMetrics,
    pub error: Option<String>,
    pub diagnostics: Vec<TableDiagnostic>,
}

/// Parse and score a model output against a gold table. Parse failures
/// are scored (pass = false, all metrics 0), never raised.
pub fn evaluate_table(model_text: &str, gt: &Table) -> TableEvaluation {
    evaluate_table_with(model_text, gt, MatchOptions::default())
}

pub fn evaluate_table_with(model_text: &str, gt: &Table, opts: MatchOptions) -> TableEvaluation {
    match parse_model_table(model_text, &gt.headers) {
        Ok(parsed) => {
            let pred = table_to_tuples(&parsed.table);
            let gold = table_to_tuples(gt);
            TableEvaluation {
                pass: true,
                metrics: LevelMetrics::evaluate(&pred.tuples, &gold.tuples, opts),
                error: None,
                diagnostics: parsed.diagnostics,
            }
        }
        Err(e) => TableEvaluation { pass: false, metrics: LevelMetrics::ZERO, error: Some(e.to_string()), diagnostics: Vec::new() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE9_CSV: &str = "Year,RDS 18_49,RDS Total,TSN 18_49,TSN Total\n\
        2014,\"58,000\",\"191,000\",\"209,000\",\"660,000\"\n\
        2015,\"63,000\",\"201,000\",\"157,000\",\"535,000\"\n\
        2016,\"41,000\",\"142,000\",\"170,000\",\"553,000\"\n";

    fn headers9() -> HeaderSet {
        HeaderSet::new(&["Year", "RDS 18_49", "RDS Total", "TSN 18_49", "TSN Total"]).unwrap()
    }

    #[test]
    fn header_set_invariants() {
        assert!(HeaderSet::new::<&str>(&[]).is_err());
        assert!(HeaderSet::new(&["a", " a "]).is_err());
    }

    #[test]
    fn gold_csv_rows_become_numeric_tuples() {
        let t = Table::from_csv(EXAMPLE9_CSV).unwrap();
        let tuples = table_to_tuples(&t);
        assert_eq!(
            tuples.tuples[0].values,
            [2014.0, 58000.0, 191000.0, 209000.0, 660000.0].map(Scalar::Num).to_vec()
        );
        assert!(table_to_tuples(&Table::new(headers9(), vec![]).unwrap()).is_empty());
    }

    #[test]
    fn markdown_table_parses() {
        let text = "| Year | RDS 18_49 | RDS Total | TSN 18_49 | TSN Total |\n\
                    |---|---|---|---|---|\n\
                    | 2014 | 58,000 | 191,000 | 209,000 | 660,000 |\n\
                    | 2015 | 63,000 | 201,000 | 157,000 | 535,000 |\n\
                    | 2016 | 41,000 | 142,000 | 170,000 | 553,000 |\n";
        let parsed = parse_model_table(text, &headers9()).unwrap();
        assert_eq!(parsed.table.rows.len(), 3);
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn prose_and_fences_are_skipped() {
        let text = "Here is the table you asked for:\n\n```markdown\n| theta | Today-r | Mean-r |\n| :-- | --: | --: |\n| AL29 | 66.87 | 44.09 |\n```\nHope this helps.";
        let h = HeaderSet::new(&["theta", "Today-r", "Mean-r"]).unwrap();
        let parsed = parse_model_table(text, &h).unwrap();
        assert_eq!(parsed.table.rows, vec![vec![Scalar::str("AL29"), Scalar::Num(66.87), Scalar::Num(44.09)]]);
    }

    #[test]
    fn columns_are_reordered_and_fuzzy_aligned() {
        let text = "mean r,THETA,Today-r\n44.09,AL29,66.87\n";
        let h = HeaderSet::new(&["theta", "Today-r", "Mean-r"]).unwrap();
        let parsed = parse_model_table(text, &h).unwrap();
        assert_eq!(parsed.table.rows[0], vec![Scalar::str("AL29"), Scalar::Num(66.87), Scalar::Num(44.09)]);
    }

    #[test]
    fn wrong_arity_rows_are_dropped() {
        let text = "|a|b|\n|1|2|\n|3|\n|5|6|";
        let parsed = parse_model_table(text, &HeaderSet::new(&["a", "b"]).unwrap()).unwrap();
        assert_eq!(parsed.table.rows.len(), 2);
        assert_eq!(parsed.diagnostics, vec![TableDiagnostic::DroppedRow { line: 3, cells: 1, expected: 2 }]);
    }

    #[test]
    fn failures() {
        let h = headers9();
        assert!(matches!(parse_model_table("I cannot read this chart.", &h), Err(TableError::UnparsableTable)));
        assert!(matches!(
            parse_model_table("| foo | qux |\n| 1 | 2 |", &h),
            Err(TableError::HeaderMismatch { resolved: 0, expected: 5 })
        ));
    }

    #[test]
    fn evaluation_examples() {
        let gt = Table::from_csv(EXAMPLE9_CSV).unwrap();
        let perfect = evaluate_table(EXAMPLE9_CSV, &gt);
        assert!(perfect.pass);
        assert_eq!(perfect.metrics.strict.f1, 1.0);

        // 63,000 -> 66,000: e = 3000/63000 ≈ 0.0476.
        let perturbed = EXAMPLE9_CSV.replace("\"63,000\"", "\"66,000\"");
        let ev = evaluate_table(&perturbed, &gt);
        assert!((ev.metrics.strict.recall - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(ev.metrics.slight.recall, 1.0);
        assert_eq!(ev.metrics.high.recall, 1.0);

        let failed = evaluate_table("no table here", &gt);
        assert!(!failed.pass);
        assert_eq!(failed.metrics, LevelMetrics::ZERO);
    }
}
