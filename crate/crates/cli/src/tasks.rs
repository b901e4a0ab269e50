use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use chartground::figure::{load_figure, parse_figure_spec, ChartType, FigureSource, FigureSpec};
use chartground::matching::{FidelityMetrics, ToleranceLevel};
use chartground::qa::{run_filters, ExecOutcome, FilterLimits, FilterReport, Removal};
use chartground::report::{aggregate, load_embedding, score_sample, Embeddings, GenStatus, SampleBundle, SampleReport};
use chartground::structure::StructureConfig;
use chartground::synth::{
    emit_plot_script, sample_style_config, EmitOptions, PlotLibrary, StyleConfig, SynthError, SCRIPT_CHART_TYPES,
};
use chartground::table::{evaluate_table, Table};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exec::execute_cached;
use crate::manifest::{read_generate, read_samples, read_triples, GenerateEntry, SampleEntry};
use crate::{CliError, OutputFormat, RunConfig, Task};

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub task: Task,
    pub samples: usize,
    pub passed: usize,
    pub artifacts: Vec<PathBuf>,
}

/// The only run-dependent values in a report; everything else is a pure
/// function of the inputs.
#[derive(Debug, Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    task: Task,
    generated_at_unix: u64,
    weights: String,
    tolerance: String,
    seed: u64,
}

fn header(cfg: &RunConfig) -> Header {
    Header {
        tool: "chartground",
        version: env!("CARGO_PKG_VERSION"),
        task: cfg.task,
        generated_at_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        weights: cfg.weights.to_string(),
        tolerance: cfg.tolerance.to_string(),
        seed: cfg.seed,
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: Header,
    report: &'a T,
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, report: &T) -> Result<PathBuf, CliError> {
    let doc = Document { header: header(cfg), report };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    write_file(&cfg.out.join(name), text)
}

fn sample_error(id: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Manifest { line: 0, message: format!("sample {id:?}: {message}") }
}

fn load_gt_figure(e: &SampleEntry) -> Result<Option<FigureSpec>, CliError> {
    e.gt_figure
        .as_ref()
        .map(|p| load_figure(p, FigureSource::GroundTruth).map_err(|err| sample_error(&e.id, err)))
        .transpose()
}

fn load_gt_table(e: &SampleEntry) -> Result<Option<Table>, CliError> {
    e.gt_table.as_ref().map(|p| Table::load_csv(p).map_err(|err| sample_error(&e.id, err))).transpose()
}

fn is_figure_document(p: &Path) -> bool {
    p.extension().is_some_and(|x| x == "json")
}

fn parse_generated(path: &Path) -> Result<FigureSpec, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_figure_spec(&bytes, FigureSource::Generated).map_err(|e| e.to_string())
}

/// Obtain the generated figure for one sample.
fn generated_figure(
    cfg: &RunConfig,
    e: &SampleEntry,
    index: usize,
) -> Result<(GenStatus, Option<FigureSpec>, Option<String>), CliError> {
    if !e.candidate.is_file() {
        return Ok((GenStatus::ParseError, None, Some(format!("candidate missing: {}", e.candidate.display()))));
    }
    if is_figure_document(&e.candidate) {
        return Ok(match parse_generated(&e.candidate) {
            Ok(f) => (GenStatus::Ok, Some(f), None),
            Err(msg) => (GenStatus::ParseError, None, Some(msg)),
        });
    }
    if cfg.task == Task::Score {
        return Err(sample_error(&e.id, "task score needs serialized .json figures; use task code for scripts"));
    }
    let (entry, status) =
        execute_cached(cfg.executor.as_deref(), &e.candidate, &cfg.out.join("cache"), cfg.timeout_secs, &index.to_string())?;
    let tail = (!status.stderr_tail.is_empty()).then(|| status.stderr_tail.clone());
    Ok(match status.outcome {
        ExecOutcome::Ok => match parse_generated(&entry.join("figure.json")) {
            Ok(f) => (GenStatus::Ok, Some(f), None),
            Err(msg) => (GenStatus::ParseError, None, Some(msg)),
        },
        ExecOutcome::ExecError => (GenStatus::ExecError, None, tail),
        ExecOutcome::EmptyFigure => (GenStatus::ExecError, None, Some("empty figure".into())),
        ExecOutcome::Timeout => (GenStatus::Timeout, None, tail),
    })
}

fn load_embeddings(e: &SampleEntry) -> Result<Option<Embeddings>, CliError> {
    match (&e.gen_embedding, &e.ref_embedding) {
        (Some(g), Some(r)) => {
            let load = |p: &Path| load_embedding(p).map_err(|err| sample_error(&e.id, err));
            Ok(Some(Embeddings { gen: load(g)?, reference: load(r)? }))
        }
        (None, None) => Ok(None),
        _ => Err(sample_error(&e.id, "gen_embedding and ref_embedding must be given together")),
    }
}

fn score_code_sample(cfg: &RunConfig, e: &SampleEntry, index: usize) -> Result<SampleReport, CliError> {
    let gt_figure = load_gt_figure(e)?.ok_or_else(|| sample_error(&e.id, "gt_figure is required"))?;
    let gt_table = load_gt_table(e)?;
    let embeddings = load_embeddings(e)?;
    let (gen_status, gen_figure, note) = generated_figure(cfg, e, index)?;
    let bundle = SampleBundle {
        id: e.id.clone(),
        gt_figure,
        gt_table,
        gt_image: e.gt_image.clone(),
        gen_figure,
        gen_status,
        embeddings,
    };
    let mut report = score_sample(&bundle, &cfg.weights, &StructureConfig::default());
    report.notes.extend(note);
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

fn code_samples_csv(reports: &[SampleReport]) -> String {
    let mut out = String::from("id,chart_type,status,pass,text_avg,color,type,layout,data_fidelity,clip,overall\n");
    for r in reports {
        let c = r.components();
        out.push_str(&format!(
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{:.4}\n",
            csv_field(&r.id),
            r.chart_type.map_or("", ChartType::as_str),
            r.status.as_str(),
            r.pass,
            c[0],
            c[1],
            c[2],
            c[3],
            c[4],
            opt(r.clip),
            r.overall
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(crate) fn run_code(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let entries = read_samples(&cfg.manifest)?;
    let reports: Vec<SampleReport> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| score_code_sample(cfg, e, i))
        .collect::<Result<_, _>>()?;
    let types: Vec<Option<ChartType>> = reports.iter().map(|r| r.chart_type).collect();
    let bench = aggregate(&reports, &types);
    let artifacts = match cfg.format {
        OutputFormat::Json => vec![write_json(cfg, "report.json", &bench)?],
        OutputFormat::Csv => vec![
            write_file(&cfg.out.join("summary.csv"), bench.code_summary_csv())?,
            write_file(&cfg.out.join("samples.csv"), code_samples_csv(&bench.samples))?,
        ],
    };
    Ok(RunSummary { task: cfg.task, samples: reports.len(), passed: reports.iter().filter(|r| r.pass).count(), artifacts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSampleReport {
    pub id: String,
    pub chart_type: Option<String>,
    pub pass: bool,
    pub error: Option<String>,
    /// Keyed by tolerance level; fractions in `[0, 1]`.
    pub metrics: BTreeMap<String, FidelityMetrics>,
    pub dropped_rows: usize,
}

/// Means over samples (failures count as 0), in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSummaryRow {
    pub samples: usize,
    pub pass_rate: f64,
    pub levels: BTreeMap<String, FidelityMetrics>,
}

impl TableSummaryRow {
    fn from_samples(samples: &[&TableSampleReport], levels: &[ToleranceLevel]) -> Self {
        let n = samples.len();
        let pct = |f: &dyn Fn(&TableSampleReport) -> f64| {
            if n == 0 {
                0.0
            } else {
                100.0 * samples.iter().map(|s| f(s)).sum::<f64>() / n as f64
            }
        };
        let levels = levels
            .iter()
            .map(|l| {
                let key = l.as_str();
                let get = |s: &TableSampleReport| s.metrics.get(key).copied().unwrap_or(FidelityMetrics::ZERO);
                let m = FidelityMetrics {
                    precision: pct(&|s| get(s).precision),
                    recall: pct(&|s| get(s).recall),
                    f1: pct(&|s| get(s).f1),
                    iou: pct(&|s| get(s).iou),
                };
                (key.to_string(), m)
            })
            .collect();
        TableSummaryRow { samples: n, pass_rate: pct(&|s| if s.pass { 1.0 } else { 0.0 }), levels }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct TableBenchmark {
    samples: Vec<TableSampleReport>,
    corpus: TableSummaryRow,
    per_type: BTreeMap<String, TableSummaryRow>,
}

fn score_table_sample(e: &SampleEntry, levels: &[ToleranceLevel]) -> Result<TableSampleReport, CliError> {
    let gt = load_gt_table(e)?.ok_or_else(|| sample_error(&e.id, "gt_table is required"))?;
    let chart_type = load_gt_figure(e)?.and_then(|f| f.primary_chart_type()).map(|t| t.as_str().to_string());
    let eval = match std::fs::read_to_string(&e.candidate) {
        Ok(text) => evaluate_table(&text, &gt),
        Err(err) => {
            let mut failed = evaluate_table("", &gt);
            failed.error = Some(format!("candidate unreadable: {}: {err}", e.candidate.display()));
            failed
        }
    };
    Ok(TableSampleReport {
        id: e.id.clone(),
        chart_type,
        pass: eval.pass,
        error: eval.error,
        metrics: levels.iter().map(|l| (l.as_str().to_string(), eval.metrics.get(*l))).collect(),
        dropped_rows: eval.diagnostics.len(),
    })
}

fn table_summary_csv(b: &TableBenchmark, levels: &[ToleranceLevel]) -> String {
    let mut out = String::from("group,samples,pass_rate");
    for l in levels {
        out.push_str(&format!(",p_{l},r_{l},f1_{l}"));
    }
    out.push('\n');
    let rows = std::iter::once(("all", &b.corpus)).chain(b.per_type.iter().map(|(k, v)| (k.as_str(), v)));
    for (name, r) in rows {
        out.push_str(&format!("{},{},{:.2}", csv_field(name), r.samples, r.pass_rate));
        for l in levels {
            let m = r.levels[l.as_str()];
            out.push_str(&format!(",{:.2},{:.2},{:.2}", m.precision, m.recall, m.f1));
        }
        out.push('\n');
    }
    out
}

fn table_samples_csv(b: &TableBenchmark, levels: &[ToleranceLevel]) -> String {
    let mut out = String::from("id,chart_type,pass");
    for l in levels {
        out.push_str(&format!(",p_{l},r_{l},f1_{l}"));
    }
    out.push_str(",error\n");
    for s in &b.samples {
        out.push_str(&format!("{},{},{}", csv_field(&s.id), s.chart_type.as_deref().unwrap_or(""), s.pass));
        for l in levels {
            let m = s.metrics[l.as_str()];
            out.push_str(&format!(",{:.4},{:.4},{:.4}", m.precision, m.recall, m.f1));
        }
        out.push_str(&format!(",{}\n", csv_field(s.error.as_deref().unwrap_or(""))));
    }
    out
}

pub(crate) fn run_table(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let entries = read_samples(&cfg.manifest)?;
    let levels = cfg.tolerance.levels();
    let mut samples: Vec<TableSampleReport> =
        entries.par_iter().map(|e| score_table_sample(e, &levels)).collect::<Result<_, _>>()?;
    samples.sort_by(|a, b| a.id.cmp(&b.id));
    let all: Vec<&TableSampleReport> = samples.iter().collect();
    let mut groups: BTreeMap<String, Vec<&TableSampleReport>> = BTreeMap::new();
    for s in &samples {
        groups.entry(s.chart_type.clone().unwrap_or_else(|| "unknown".into())).or_default().push(s);
    }
    let bench = TableBenchmark {
        corpus: TableSummaryRow::from_samples(&all, &levels),
        per_type: groups.into_iter().map(|(k, v)| (k, TableSummaryRow::from_samples(&v, &levels))).collect(),
        samples,
    };
    let artifacts = match cfg.format {
        OutputFormat::Json => vec![write_json(cfg, "report.json", &bench)?],
        OutputFormat::Csv => vec![
            write_file(&cfg.out.join("summary.csv"), table_summary_csv(&bench, &levels))?,
            write_file(&cfg.out.join("samples.csv"), table_samples_csv(&bench, &levels))?,
        ],
    };
    let passed = bench.samples.iter().filter(|s| s.pass).count();
    Ok(RunSummary { task: cfg.task, samples: bench.samples.len(), passed, artifacts })
}

#[derive(Serialize)]
struct StageRow<'a> {
    stage: chartground::qa::Stage,
    input: usize,
    removed: usize,
    retained: usize,
    skipped: bool,
    unchecked: usize,
    removals: &'a [Removal],
}

#[derive(Serialize)]
struct DedupDocument<'a> {
    input: usize,
    stages: Vec<StageRow<'a>>,
    retained: Vec<&'a str>,
}

fn dedup_document(r: &FilterReport) -> DedupDocument<'_> {
    DedupDocument {
        input: r.input,
        stages: r
            .stages
            .iter()
            .map(|s| StageRow {
                stage: s.stage,
                input: s.input,
                removed: s.removed,
                retained: s.retained,
                skipped: s.skipped,
                unchecked: s.unchecked,
                removals: &s.removals,
            })
            .collect(),
        retained: r.retained.iter().map(|t| t.id.as_str()).collect(),
    }
}

pub(crate) fn run_dedup(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let records = read_triples(&cfg.manifest)?;
    let limits = FilterLimits { max_code_chars: cfg.max_code_chars.expect("validated") };
    let report = run_filters(records, limits);
    let mut retained = String::new();
    for r in &report.retained {
        retained.push_str(&serde_json::to_string(r).expect("record serializes"));
        retained.push('\n');
    }
    let mut artifacts = vec![write_file(&cfg.out.join("retained.jsonl"), retained)?];
    match cfg.format {
        OutputFormat::Json => artifacts.push(write_json(cfg, "filter_report.json", &dedup_document(&report))?),
        OutputFormat::Csv => {
            let mut csv = String::from("stage,input,removed,retained,skipped,unchecked\n");
            for s in &report.stages {
                let name = serde_json::to_value(s.stage).expect("stage serializes");
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    name.as_str().unwrap_or_default(),
                    s.input,
                    s.removed,
                    s.retained,
                    s.skipped,
                    s.unchecked
                ));
            }
            artifacts.push(write_file(&cfg.out.join("stages.csv"), csv)?);
        }
    }
    Ok(RunSummary { task: cfg.task, samples: report.input, passed: report.retained.len(), artifacts })
}

/// Per-record style seed, independent of manifest order.
pub(crate) fn derive_seed(seed: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' }).collect()
}

#[derive(Debug, Serialize)]
struct Generated {
    id: String,
    table: PathBuf,
    script: PathBuf,
    chart_type: ChartType,
    library: PlotLibrary,
    seed: u64,
    style: StyleConfig,
}

#[derive(Debug, Serialize)]
struct Skipped {
    id: String,
    reason: String,
}

enum GenerateOutcome {
    Done(Generated, String),
    Skipped(Skipped),
}

fn parse_library(e: &GenerateEntry, default: PlotLibrary) -> Result<PlotLibrary, CliError> {
    match e.library.as_deref() {
        None => Ok(default),
        Some("plotly") => Ok(PlotLibrary::Plotly),
        Some("matplotlib") => Ok(PlotLibrary::Matplotlib),
        Some(other) => Err(sample_error(&e.id, format!("unknown library {other:?}"))),
    }
}

fn generate_one(cfg: &RunConfig, e: &GenerateEntry) -> Result<GenerateOutcome, CliError> {
    let table = Table::load_csv(&e.table).map_err(|err| sample_error(&e.id, err))?;
    let seed = derive_seed(cfg.seed, &e.id);
    let style = sample_style_config(seed);
    let library = parse_library(e, cfg.library)?;
    let opts = EmitOptions { library, title: e.title.clone(), table_ref: e.table.display().to_string(), title_width: None };
    let candidates: Vec<ChartType> = match &e.chart_type {
        Some(name) => vec![name.parse().map_err(|err| sample_error(&e.id, err))?],
        None => {
            let start = (seed % SCRIPT_CHART_TYPES.len() as u64) as usize;
            (0..SCRIPT_CHART_TYPES.len()).map(|k| SCRIPT_CHART_TYPES[(start + k) % SCRIPT_CHART_TYPES.len()]).collect()
        }
    };
    let mut last: Option<SynthError> = None;
    for t in candidates {
        match emit_plot_script(&table, t, &style, &opts) {
            Ok(art) => {
                let script = cfg.out.join("scripts").join(format!("{}.py", file_stem(&e.id)));
                let g = Generated { id: e.id.clone(), table: e.table.clone(), script, chart_type: t, library, seed, style };
                return Ok(GenerateOutcome::Done(g, art.script_text));
            }
            Err(err) => last = Some(err),
        }
    }
    let reason = last.map_or_else(|| "no chart type".into(), |e| e.to_string());
    Ok(GenerateOutcome::Skipped(Skipped { id: e.id.clone(), reason }))
}

#[derive(Serialize)]
struct GenerateDocument<'a> {
    generated: &'a [Generated],
    skipped: &'a [Skipped],
}

pub(crate) fn run_generate(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let entries = read_generate(&cfg.manifest)?;
    let outcomes: Vec<GenerateOutcome> = entries.par_iter().map(|e| generate_one(cfg, e)).collect::<Result<_, _>>()?;
    let mut generated = Vec::new();
    let mut skipped = Vec::new();
    let mut artifacts = Vec::new();
    for o in outcomes {
        match o {
            GenerateOutcome::Done(g, text) => {
                artifacts.push(write_file(&g.script, text)?);
                generated.push(g);
            }
            GenerateOutcome::Skipped(s) => skipped.push(s),
        }
    }
    let mut lines = String::new();
    for g in &generated {
        lines.push_str(&serde_json::to_string(g).expect("entry serializes"));
        lines.push('\n');
    }
    artifacts.push(write_file(&cfg.out.join("generated.jsonl"), lines)?);
    artifacts.push(write_json(cfg, "generate_report.json", &GenerateDocument { generated: &generated, skipped: &skipped })?);
    Ok(RunSummary { task: cfg.task, samples: entries.len(), passed: generated.len(), artifacts })
}
