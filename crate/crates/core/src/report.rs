//! Per-sample score assembly and corpus aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::extract_tuples;
use crate::figure::{ChartType, FigureSpec};
use crate::matching::{FidelityMetrics, LevelMetrics, MatchOptions, ToleranceLevel};
use crate::structure::{structure_scores, StructureConfig, StructureScores, TextScores};
use crate::table::Table;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClipError {
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("embedding has zero norm")]
    ZeroVector,
}

/// `100 * max(0, cos(gen, ref))`.
pub fn clip_similarity(gen: &[f32], reference: &[f32]) -> Result<f64, ClipError> {
    if gen.len() != reference.len() {
        return Err(ClipError::DimensionMismatch(gen.len(), reference.len()));
    }
    let (mut dot, mut ng, mut nr) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in gen.iter().zip(reference) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        ng += a * a;
        nr += b * b;
    }
    if ng == 0.0 || nr == 0.0 || !ng.is_finite() || !nr.is_finite() {
        return Err(ClipError::ZeroVector);
    }
    let cos = (dot / (ng.sqrt() * nr.sqrt())).clamp(-1.0, 1.0);
    Ok(100.0 * cos.max(0.0))
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: bad header, expected the vector dimension on the first line")]
    BadHeader { path: PathBuf },
    #[error("{path}: expected {expected} float32 bytes, found {found}")]
    Truncated { path: PathBuf, expected: usize, found: usize },
}

/// Read an embedding file: a text line giving the dimension, then that many
/// little-endian `f32` values.
pub fn load_embedding(path: &Path) -> Result<Vec<f32>, EmbeddingError> {
    let bytes = std::fs::read(path).map_err(|source| EmbeddingError::Io { path: path.into(), source })?;
    decode_embedding(&bytes).map_err(|e| match e {
        DecodeError::Header => EmbeddingError::BadHeader { path: path.into() },
        DecodeError::Length { expected, found } => EmbeddingError::Truncated { path: path.into(), expected, found },
    })
}

enum DecodeError {
    Header,
    Length { expected: usize, found: usize },
}

fn decode_embedding(bytes: &[u8]) -> Result<Vec<f32>, DecodeError> {
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or(DecodeError::Header)?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| DecodeError::Header)?;
    let dim: usize = header
        .split_whitespace()
        .last()
        .and_then(|t| t.trim_start_matches("dim=").parse().ok())
        .ok_or(DecodeError::Header)?;
    let body = &bytes[nl + 1..];
    if body.len() != dim * 4 {
        return Err(DecodeError::Length { expected: dim * 4, found: body.len() });
    }
    Ok(body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

pub fn write_embedding(path: &Path, v: &[f32]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", v.len())?;
    for x in v {
        f.write_all(&x.to_le_bytes())?;
    }
    f.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenStatus {
    Ok,
    ExecError,
    ParseError,
    Timeout,
}

impl GenStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GenStatus::Ok => "ok",
            GenStatus::ExecError => "exec_error",
            GenStatus::ParseError => "parse_error",
            GenStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub gen: Vec<f32>,
    pub reference: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBundle {
    pub id: String,
    pub gt_figure: FigureSpec,
    pub gt_table: Option<Table>,
    pub gt_image: Option<PathBuf>,
    pub gen_figure: Option<FigureSpec>,
    pub gen_status: GenStatus,
    pub embeddings: Option<Embeddings>,
}

/// Relative weights of the six overall components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub text: f64,
    pub color: f64,
    pub chart_type: f64,
    pub layout: f64,
    pub data: f64,
    pub clip: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { text: 1.0, color: 1.0, chart_type: 1.0, layout: 1.0, data: 1.0, clip: 1.0 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid weights {0:?}: expected six non-negative numbers (text,color,type,layout,data,clip) or key=value pairs, not all zero")]
pub struct InvalidWeights(pub String);

impl FromStr for Weights {
    type Err = InvalidWeights;

    /// Accepts `1,1,1,1,1,1` or `text=2,clip=0` (unnamed keys keep 1).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidWeights(s.to_string());
        let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        let mut w = Weights::default();
        if parts.iter().all(|p| !p.contains('=')) {
            let vals: Vec<f64> = parts.iter().map(|p| p.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
            let [text, color, chart_type, layout, data, clip] = vals.try_into().map_err(|_| bad())?;
            w = Weights { text, color, chart_type, layout, data, clip };
        } else {
            for p in parts {
                let (k, v) = p.split_once('=').ok_or_else(bad)?;
                let v: f64 = v.trim().parse().map_err(|_| bad())?;
                match k.trim() {
                    "text" => w.text = v,
                    "color" => w.color = v,
                    "type" | "chart_type" => w.chart_type = v,
                    "layout" => w.layout = v,
                    "data" => w.data = v,
                    "clip" => w.clip = v,
                    _ => return Err(bad()),
                }
            }
        }
        let all = w.as_array();
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) || all.iter().all(|x| *x == 0.0) {
            return Err(bad());
        }
        Ok(w)
    }
}

impl Weights {
    pub fn as_array(&self) -> [f64; 6] {
        [self.text, self.color, self.chart_type, self.layout, self.data, self.clip]
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "text={},color={},type={},layout={},data={},clip={}",
            self.text, self.color, self.chart_type, self.layout, self.data, self.clip
        )
    }
}

/// Component scores on `[0, 100]`; `clip` absent when no embeddings were
/// supplied.
pub fn overall_score(components: [f64; 5], clip: Option<f64>, w: &Weights) -> f64 {
    let weights = w.as_array();
    let mut num = 0.0;
    let mut den = 0.0;
    for (s, wt) in components.iter().zip(&weights[..5]) {
        num += wt * s;
        den += wt;
    }
    if let Some(c) = clip {
        num += weights[5] * c;
        den += weights[5];
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub id: String,
    pub chart_type: Option<ChartType>,
    pub status: GenStatus,
    pub pass: bool,
    /// Fractions in `[0, 1]`.
    pub structure: StructureScores,
    pub data_fidelity: LevelMetrics,
    /// `[0, 100]`.
    pub clip: Option<f64>,
    /// `[0, 100]`.
    pub overall: f64,
    pub notes: Vec<String>,
}

impl SampleReport {
    /// The five non-perceptual components on `[0, 100]`.
    pub fn components(&self) -> [f64; 5] {
        [
            self.structure.text.avg * 100.0,
            self.structure.color * 100.0,
            self.structure.chart_type * 100.0,
            self.structure.layout * 100.0,
            self.data_fidelity.get(ToleranceLevel::Slight).iou * 100.0,
        ]
    }

    /// A failed sample: every score zero.
    pub fn failed(id: &str, status: GenStatus, reference: &FigureSpec, has_clip: bool, note: Option<String>) -> Self {
        SampleReport {
            id: id.to_string(),
            chart_type: reference.primary_chart_type(),
            status,
            pass: false,
            structure: StructureScores { text: TextScores::zeroed_like(reference), color: 0.0, chart_type: 0.0, layout: 0.0 },
            data_fidelity: LevelMetrics::ZERO,
            clip: has_clip.then_some(0.0),
            overall: 0.0,
            notes: note.into_iter().collect(),
        }
    }
}

pub fn score_sample(b: &SampleBundle, weights: &Weights, cfg: &StructureConfig) -> SampleReport {
    let gen = match (b.gen_status, &b.gen_figure) {
        (GenStatus::Ok, Some(g)) => g,
        (GenStatus::Ok, None) => {
            return SampleReport::failed(
                &b.id,
                GenStatus::ParseError,
                &b.gt_figure,
                b.embeddings.is_some(),
                Some("status ok but no generated figure".into()),
            )
        }
        (status, _) => return SampleReport::failed(&b.id, status, &b.gt_figure, b.embeddings.is_some(), None),
    };
    let mut notes = Vec::new();
    let structure = structure_scores(gen, &b.gt_figure, cfg);
    let pred = extract_tuples(gen).pooled();
    let gt = extract_tuples(&b.gt_figure).pooled();
    let data_fidelity = LevelMetrics::evaluate(&pred, &gt, MatchOptions::default());
    let clip = b.embeddings.as_ref().and_then(|e| match clip_similarity(&e.gen, &e.reference) {
        Ok(c) => Some(c),
        Err(err) => {
            notes.push(format!("clip skipped: {err}"));
            None
        }
    });
    let mut report = SampleReport {
        id: b.id.clone(),
        chart_type: b.gt_figure.primary_chart_type(),
        status: GenStatus::Ok,
        pass: true,
        structure,
        data_fidelity,
        clip,
        overall: 0.0,
        notes,
    };
    report.overall = overall_score(report.components(), report.clip, weights);
    report
}

/// One row of the summary table; every score on `[0, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub samples: usize,
    pub pass_rate: f64,
    /// Category means over samples whose reference has that category.
    pub legend: Option<f64>,
    pub title: Option<f64>,
    pub axis_label: Option<f64>,
    pub annotations: Option<f64>,
    pub text_avg: f64,
    pub color: f64,
    pub chart_type: f64,
    pub layout: f64,
    /// IoU at slight tolerance.
    pub data_fidelity: f64,
    pub clip: Option<f64>,
    pub overall: f64,
    pub precision: LevelColumns,
    pub recall: LevelColumns,
    pub f1: LevelColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelColumns {
    pub strict: f64,
    pub slight: f64,
    pub high: f64,
}

impl LevelColumns {
    fn mean_of(reports: &[&SampleReport], pick: impl Fn(&FidelityMetrics) -> f64) -> Self {
        let m = |level| mean(reports.iter().map(|r| pick(&r.data_fidelity.get(level)) * 100.0));
        LevelColumns { strict: m(ToleranceLevel::Strict), slight: m(ToleranceLevel::Slight), high: m(ToleranceLevel::High) }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn optional_mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    (!present.is_empty()).then(|| mean(present.into_iter()))
}

impl SummaryRow {
    pub fn from_reports(reports: &[&SampleReport]) -> Self {
        let n = reports.len();
        let passed = reports.iter().filter(|r| r.pass).count();
        let text = |f: fn(&TextScores) -> Option<f64>| optional_mean(reports.iter().map(|r| f(&r.structure.text).map(|v| v * 100.0)));
        let comp = |k: usize| mean(reports.iter().map(|r| r.components()[k]));
        SummaryRow {
            samples: n,
            pass_rate: if n == 0 { 0.0 } else { 100.0 * passed as f64 / n as f64 },
            legend: text(|t| t.legend),
            title: text(|t| t.title),
            axis_label: text(|t| t.axis_label),
            annotations: text(|t| t.annotations),
            text_avg: comp(0),
            color: comp(1),
            chart_type: comp(2),
            layout: comp(3),
            data_fidelity: comp(4),
            clip: optional_mean(reports.iter().map(|r| r.clip)),
            overall: mean(reports.iter().map(|r| r.overall)),
            precision: LevelColumns::mean_of(reports, |m| m.precision),
            recall: LevelColumns::mean_of(reports, |m| m.recall),
            f1: LevelColumns::mean_of(reports, |m| m.f1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub samples: Vec<SampleReport>,
    pub corpus: SummaryRow,
    /// Keyed by chart type name; samples without a type fall under "unknown".
    pub per_type: BTreeMap<String, SummaryRow>,
}

/// Corpus means (failures contributing zero) and per-type breakdown.
/// Samples are ordered by id so the result does not depend on input order.
pub fn aggregate(reports: &[SampleReport], types: &[Option<ChartType>]) -> BenchmarkReport {
    assert_eq!(reports.len(), types.len(), "one chart type per report");
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| reports[a].id.cmp(&reports[b].id).then(a.cmp(&b)));
    let samples: Vec<SampleReport> = order.iter().map(|&i| reports[i].clone()).collect();
    let all: Vec<&SampleReport> = samples.iter().collect();
    let mut groups: BTreeMap<String, Vec<&SampleReport>> = BTreeMap::new();
    for &i in &order {
        let key = types[i].map_or("unknown", ChartType::as_str).to_string();
        groups.entry(key).or_default().push(&reports[i]);
    }
    BenchmarkReport {
        corpus: SummaryRow::from_reports(&all),
        per_type: groups.into_iter().map(|(k, v)| (k, SummaryRow::from_reports(&v))).collect(),
        samples,
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

pub const CODE_SUMMARY_HEADER: &str =
    "group,samples,pass_rate,legend,title,axis_label,annos,text_avg,color,type,layout,data_fidelity,clip,overall";
pub const TABLE_SUMMARY_HEADER: &str =
    "group,samples,pass_rate,p_strict,r_strict,f1_strict,p_slight,r_slight,f1_slight,p_high,r_high,f1_high";

impl BenchmarkReport {
    fn rows(&self) -> impl Iterator<Item = (&str, &SummaryRow)> {
        std::iter::once(("all", &self.corpus)).chain(self.per_type.iter().map(|(k, v)| (k.as_str(), v)))
    }

    /// Code-task summary in leaderboard column order.
    pub fn code_summary_csv(&self) -> String {
        let mut out = String::from(CODE_SUMMARY_HEADER);
        out.push('\n');
        for (name, r) in self.rows() {
            let cols = [
                format!("{:.2}", r.pass_rate),
                cell(r.legend),
                cell(r.title),
                cell(r.axis_label),
                cell(r.annotations),
                format!("{:.2}", r.text_avg),
                format!("{:.2}", r.color),
                format!("{:.2}", r.chart_type),
                format!("{:.2}", r.layout),
                format!("{:.2}", r.data_fidelity),
                cell(r.clip),
                format!("{:.2}", r.overall),
            ];
            out.push_str(&format!("{name},{},{}\n", r.samples, cols.join(",")));
        }
        out
    }

    /// Table-task summary: pass rate then P/R/F1 per tolerance level.
    pub fn table_summary_csv(&self) -> String {
        let mut out = String::from(TABLE_SUMMARY_HEADER);
        out.push('\n');
        for (name, r) in self.rows() {
            let mut cols = vec![format!("{:.2}", r.pass_rate)];
            for (p, rc, f) in [
                (r.precision.strict, r.recall.strict, r.f1.strict),
                (r.precision.slight, r.recall.slight, r.f1.slight),
                (r.precision.high, r.recall.high, r.f1.high),
            ] {
                cols.extend([format!("{p:.2}"), format!("{rc:.2}"), format!("{f:.2}")]);
            }
            out.push_str(&format!("{name},{},{}\n", r.samples, cols.join(",")));
        }
        out
    }
}
