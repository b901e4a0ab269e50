//! Running candidate scripts through the external executor, with results
//! cached by script content hash.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use chartground::qa::{ExecOutcome, ExecStatus};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Extra wall-clock time granted to the executor beyond the script timeout
/// before the host kills it.
const HOST_GRACE: Duration = Duration::from_secs(10);

pub fn script_key(script: &[u8]) -> String {
    hex::encode(Sha256::digest(script))
}

/// Where a script's executor outputs live: `<cache>/<sha256>/`.
pub fn cache_entry(cache_dir: &Path, script: &[u8]) -> PathBuf {
    cache_dir.join(script_key(script))
}

pub fn cached_status(entry: &Path) -> Option<ExecStatus> {
    let text = std::fs::read_to_string(entry.join("status.json")).ok()?;
    serde_json::from_str(&text).ok()
}

/// Split an executor command line on whitespace: program then fixed args.
fn command_parts(executor: &str) -> Result<(String, Vec<String>), CliError> {
    let mut parts = executor.split_whitespace().map(str::to_string);
    let program = parts.next().ok_or_else(|| CliError::ExecutorUnavailable("empty executor command".into()))?;
    Ok((program, parts.collect()))
}

/// Run `executor <script> --timeout N --out-dir D` unless the cache already
/// holds a status for this script.
pub fn execute_cached(
    executor: Option<&str>,
    script_path: &Path,
    cache_dir: &Path,
    timeout_secs: u64,
    unique: &str,
) -> Result<(PathBuf, ExecStatus), CliError> {
    let script = std::fs::read(script_path).map_err(|source| CliError::Io { path: script_path.into(), source })?;
    let entry = cache_entry(cache_dir, &script);
    if let Some(status) = cached_status(&entry) {
        return Ok((entry, status));
    }
    let executor = executor.ok_or_else(|| {
        CliError::ExecutorUnavailable(format!("{} is not cached and no --executor was given", script_path.display()))
    })?;
    let (program, fixed) = command_parts(executor)?;

    let staging = cache_dir.join(format!(".staging-{}-{unique}", std::process::id()));
    let _ = std::fs::remove_dir_all(&staging);
    std::fs::create_dir_all(&staging).map_err(|source| CliError::Io { path: staging.clone(), source })?;
    let script_copy = staging.join("script.py");
    std::fs::write(&script_copy, &script).map_err(|source| CliError::Io { path: script_copy.clone(), source })?;
    let out_dir = staging.join("out");
    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io { path: out_dir.clone(), source })?;

    let started = Instant::now();
    let mut child = Command::new(&program)
        .args(&fixed)
        .arg(&script_copy)
        .arg("--timeout")
        .arg(timeout_secs.to_string())
        .arg("--out-dir")
        .arg(&out_dir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| CliError::ExecutorUnavailable(format!("{program}: {e}")))?;
    let limit = Duration::from_secs(timeout_secs) + HOST_GRACE;
    let host_status = loop {
        match child.try_wait() {
            Ok(Some(_)) => break None,
            Ok(None) if started.elapsed() > limit => {
                let _ = child.kill();
                let _ = child.wait();
                break Some(ExecStatus {
                    outcome: ExecOutcome::Timeout,
                    stderr_tail: "killed by host after timeout".into(),
                    duration_ms: started.elapsed().as_millis() as u64,
                });
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(20)),
            Err(e) => return Err(CliError::ExecutorUnavailable(format!("{program}: {e}"))),
        }
    };
    let status = host_status.or_else(|| cached_status(&out_dir)).unwrap_or_else(|| ExecStatus {
        outcome: ExecOutcome::ExecError,
        stderr_tail: "executor wrote no status.json".into(),
        duration_ms: started.elapsed().as_millis() as u64,
    });
    // Persist the status the host settled on, then publish atomically.
    let status_path = out_dir.join("status.json");
    std::fs::write(&status_path, serde_json::to_vec_pretty(&status).expect("status serializes"))
        .map_err(|source| CliError::Io { path: status_path, source })?;
    if std::fs::rename(&out_dir, &entry).is_err() && cached_status(&entry).is_none() {
        return Err(CliError::Io {
            path: entry,
            source: std::io::Error::other("could not publish executor output to cache"),
        });
    }
    let _ = std::fs::remove_dir_all(&staging);
    Ok((entry, status))
}
