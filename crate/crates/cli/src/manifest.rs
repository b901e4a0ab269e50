//! JSON Lines manifests. Blank lines and lines starting with `#` are
//! skipped; relative paths resolve against the manifest's directory.

use std::path::{Path, PathBuf};

use chartground::qa::TripleRecord;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

/// One benchmark sample.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SampleEntry {
    pub id: String,
    #[serde(default)]
    pub gt_table: Option<PathBuf>,
    #[serde(default)]
    pub gt_figure: Option<PathBuf>,
    #[serde(default)]
    pub gt_image: Option<PathBuf>,
    /// Generated script, serialized figure document, or model text output.
    pub candidate: PathBuf,
    #[serde(default)]
    pub gen_embedding: Option<PathBuf>,
    #[serde(default)]
    pub ref_embedding: Option<PathBuf>,
}

/// One table to render into a plotting script.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GenerateEntry {
    pub id: String,
    pub table: PathBuf,
    #[serde(default)]
    pub chart_type: Option<String>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub library: Option<String>,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn rebase_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p.as_mut() {
        rebase(base, p);
    }
}

fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let entry = serde_json::from_str(t).map_err(|e| CliError::Manifest { line: n + 1, message: e.to_string() })?;
        out.push(entry);
    }
    Ok(out)
}

fn check_unique_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Result<(), CliError> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CliError::Manifest { line: 0, message: format!("duplicate id {id:?}") });
        }
    }
    Ok(())
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn read_samples(path: &Path) -> Result<Vec<SampleEntry>, CliError> {
    let base = base_dir(path);
    let mut entries: Vec<SampleEntry> = read_lines(path)?;
    for e in &mut entries {
        rebase_opt(&base, &mut e.gt_table);
        rebase_opt(&base, &mut e.gt_figure);
        rebase_opt(&base, &mut e.gt_image);
        rebase(&base, &mut e.candidate);
        rebase_opt(&base, &mut e.gen_embedding);
        rebase_opt(&base, &mut e.ref_embedding);
    }
    check_unique_ids(entries.iter().map(|e| e.id.as_str()))?;
    Ok(entries)
}

pub fn read_triples(path: &Path) -> Result<Vec<TripleRecord>, CliError> {
    let base = base_dir(path);
    let records: Vec<TripleRecord> = read_lines(path)?;
    let records: Vec<TripleRecord> = records.into_iter().map(|r| r.rebase(&base)).collect();
    check_unique_ids(records.iter().map(|r| r.id.as_str()))?;
    Ok(records)
}

pub fn read_generate(path: &Path) -> Result<Vec<GenerateEntry>, CliError> {
    let base = base_dir(path);
    let mut entries: Vec<GenerateEntry> = read_lines(path)?;
    for e in &mut entries {
        rebase(&base, &mut e.table);
    }
    check_unique_ids(entries.iter().map(|e| e.id.as_str()))?;
    Ok(entries)
}
