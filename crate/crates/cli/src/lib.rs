//! Batch front-end: scores chart-to-code and chart-to-table outputs, runs
//! the dataset filters and generates synthetic plotting scripts.

pub mod exec;
pub mod manifest;
mod tasks;

use std::path::PathBuf;
use std::str::FromStr;

use chartground::matching::ToleranceLevel;
use chartground::report::Weights;
use chartground::synth::PlotLibrary;
use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use tasks::{RunSummary, TableSampleReport, TableSummaryRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("manifest error at line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("executor unavailable: {0}")]
    ExecutorUnavailable(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Manifest { .. } => 3,
            CliError::ExecutorUnavailable(_) => 4,
            CliError::Io { .. } => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Score generated scripts (executed or cached) against ground truth.
    Code,
    /// Score model table outputs against gold tables.
    Table,
    /// Run the staged dataset filters.
    Dedup,
    /// Render tables into styled plotting scripts.
    Generate,
    /// Score pre-serialized generated figures; never executes anything.
    Score,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceSelection {
    All,
    One(ToleranceLevel),
}

impl ToleranceSelection {
    pub fn levels(self) -> Vec<ToleranceLevel> {
        match self {
            ToleranceSelection::All => ToleranceLevel::ALL.to_vec(),
            ToleranceSelection::One(l) => vec![l],
        }
    }
}

impl FromStr for ToleranceSelection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            Ok(ToleranceSelection::All)
        } else {
            s.parse().map(ToleranceSelection::One)
        }
    }
}

impl std::fmt::Display for ToleranceSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ToleranceSelection::All => f.write_str("all"),
            ToleranceSelection::One(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LibraryArg {
    Plotly,
    Matplotlib,
}

impl From<LibraryArg> for PlotLibrary {
    fn from(l: LibraryArg) -> Self {
        match l {
            LibraryArg::Plotly => PlotLibrary::Plotly,
            LibraryArg::Matplotlib => PlotLibrary::Matplotlib,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "chartground", version, about = "Chart grounding evaluation and dataset pipelines")]
pub struct Cli {
    #[arg(long, value_enum)]
    pub task: Task,
    /// JSON Lines manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// strict, slight, high or all.
    #[arg(long, default_value = "all")]
    pub tolerance: ToleranceSelection,
    /// Six comma-separated weights (text,color,type,layout,data,clip) or key=value pairs.
    #[arg(long, default_value = "1,1,1,1,1,1")]
    pub weights: Weights,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Executor command; the script path and flags are appended.
    #[arg(long)]
    pub executor: Option<String>,
    /// Per-sample timeout in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Structural filter limit for task=dedup.
    #[arg(long)]
    pub max_code_chars: Option<usize>,
    /// Plotting library for task=generate when the manifest does not say.
    #[arg(long, value_enum, default_value = "plotly")]
    pub library: LibraryArg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub tolerance: ToleranceSelection,
    pub weights: Weights,
    pub jobs: usize,
    pub executor: Option<String>,
    pub timeout_secs: u64,
    pub seed: u64,
    pub format: OutputFormat,
    pub max_code_chars: Option<usize>,
    pub library: PlotLibrary,
}

impl RunConfig {
    pub fn new(task: Task, manifest: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            task,
            manifest: manifest.into(),
            out: out.into(),
            tolerance: ToleranceSelection::All,
            weights: Weights::default(),
            jobs: 1,
            executor: None,
            timeout_secs: 30,
            seed: 0,
            format: OutputFormat::Json,
            max_code_chars: None,
            library: PlotLibrary::Plotly,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if self.timeout_secs == 0 {
            return Err(CliError::Config("--timeout must be positive".into()));
        }
        if self.task == Task::Dedup && self.max_code_chars.is_none() {
            return Err(CliError::Config("task dedup needs --max-code-chars".into()));
        }
        Ok(())
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            task: c.task,
            manifest: c.manifest,
            out: c.out,
            tolerance: c.tolerance,
            weights: c.weights,
            jobs: c.jobs,
            executor: c.executor,
            timeout_secs: c.timeout,
            seed: c.seed,
            format: c.format,
            max_code_chars: c.max_code_chars,
            library: c.library.into(),
        }
    }
}

/// Execute one task. Per-sample failures are scored, not raised; errors
/// are reserved for configuration, manifest and I/O problems.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out).map_err(|source| CliError::Io { path: config.out.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| match config.task {
        Task::Code | Task::Score => tasks::run_code(config),
        Task::Table => tasks::run_table(config),
        Task::Dedup => tasks::run_dedup(config),
        Task::Generate => tasks::run_generate(config),
    })
}
