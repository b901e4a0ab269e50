mod common;

use std::path::Path;
use std::process::Command;

use chartground_cli::{run, CliError, OutputFormat, RunConfig, Task};
use common::*;

fn run_task(task: Task, manifest: &Path, out: &Path) -> chartground_cli::RunSummary {
    run(&RunConfig::new(task, manifest, out)).unwrap()
}

#[test]
fn table_task_scores_perfect_and_unparsable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = table_corpus(dir.path(), &[PERFECT_OUTPUT, "Sorry, I cannot read this chart."]);
    let out = dir.path().join("out");
    let summary = run_task(Task::Table, &manifest, &out);
    assert_eq!((summary.samples, summary.passed), (2, 1));
    let r = read_report(&out, "report.json");
    assert_eq!(r["report"]["corpus"]["pass_rate"], 50.0);
    let samples = r["report"]["samples"].as_array().unwrap();
    assert_eq!(samples[0]["metrics"]["strict"]["f1"], 1.0);
    assert_eq!(samples[1]["pass"], false);
    assert_eq!(samples[1]["metrics"]["high"]["f1"], 0.0);
    assert_eq!(r["report"]["per_type"]["line"]["samples"], 2);
}

#[test]
fn table_task_csv_restricted_to_one_level() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = table_corpus(dir.path(), &[PERFECT_OUTPUT]);
    let out = dir.path().join("out");
    let mut cfg = RunConfig::new(Task::Table, &manifest, &out);
    cfg.format = OutputFormat::Csv;
    cfg.tolerance = "strict".parse().unwrap();
    run(&cfg).unwrap();
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "group,samples,pass_rate,p_strict,r_strict,f1_strict");
    assert!(summary.contains("all,1,100.00,100.00,100.00,100.00"));
}

fn figure_corpus(dir: &Path, names: &[&str]) -> std::path::PathBuf {
    let mut manifest = String::new();
    for n in names {
        let f = core_fixture(&format!("{n}.figure.json"));
        manifest.push_str(&format!(
            "{{\"id\":\"{n}\",\"gt_figure\":\"{0}\",\"candidate\":\"{0}\"}}\n",
            f.display()
        ));
    }
    write(dir, "manifest.jsonl", &manifest)
}

#[test]
fn identical_serialized_figures_score_100() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = figure_corpus(dir.path(), &["bar", "pie", "heatmap", "sankey"]);
    let out = dir.path().join("out");
    for task in [Task::Code, Task::Score] {
        run_task(task, &manifest, &out);
        let r = read_report(&out, "report.json");
        for s in r["report"]["samples"].as_array().unwrap() {
            assert!((s["overall"].as_f64().unwrap() - 100.0).abs() < 1e-9, "{s}");
        }
        assert_eq!(r["report"]["corpus"]["pass_rate"], 100.0);
    }
}

#[test]
fn reports_are_byte_identical_apart_from_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = figure_corpus(dir.path(), &["scatter", "box", "parcoords"]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut cfg = RunConfig::new(Task::Code, &manifest, &a);
    cfg.jobs = 3;
    run(&cfg).unwrap();
    cfg.out = b.clone();
    cfg.jobs = 1;
    run(&cfg).unwrap();
    assert_eq!(read_report(&a, "report.json")["report"], read_report(&b, "report.json")["report"]);
    let body = |p: &Path| {
        let text = std::fs::read_to_string(p.join("report.json")).unwrap();
        text[text.find("\"report\"").unwrap()..].to_string()
    };
    assert_eq!(body(&a), body(&b));
}

#[test]
fn dedup_keeps_one_of_duplicated_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let table = "City,Category,Score\nParis,A,88.0\nParis,B,92.0\nLondon,A,84.0\nLondon,B,94.0\n";
    write(d, "t1.csv", table);
    write(d, "t2.csv", table);
    write(d, "fig.json", "{}");
    write(d, "plot.py", "print('chart')\n");
    let manifest = write(
        d,
        "triples.jsonl",
        "{\"id\":\"a\",\"table\":\"t1.csv\",\"figure\":\"fig.json\",\"script\":\"plot.py\"}\n\
         {\"id\":\"b\",\"table\":\"t2.csv\",\"figure\":\"fig.json\",\"script\":\"plot.py\"}\n",
    );
    let out = d.join("out");
    let mut cfg = RunConfig::new(Task::Dedup, &manifest, &out);
    cfg.max_code_chars = Some(1000);
    let summary = run(&cfg).unwrap();
    assert_eq!((summary.samples, summary.passed), (2, 1));
    let r = read_report(&out, "filter_report.json");
    assert_eq!(r["report"]["retained"], serde_json::json!(["a"]));
    let dedup = &r["report"]["stages"][2];
    assert_eq!(dedup["removals"][0]["retained_id"], "a");
    assert_eq!(r["report"]["stages"][3]["skipped"], true);
    let retained = std::fs::read_to_string(out.join("retained.jsonl")).unwrap();
    assert_eq!(retained.lines().count(), 1);
}

#[cfg(unix)]
fn fake_executor(dir: &Path, figure: &Path) -> std::path::PathBuf {
    use std::os::unix::fs::PermissionsExt;
    let log = dir.join("calls.log");
    let body = format!(
        "#!/bin/sh\n\
         echo \"$1\" >> '{log}'\n\
         while [ $# -gt 0 ]; do if [ \"$1\" = --out-dir ]; then out=\"$2\"; fi; shift; done\n\
         cp '{fig}' \"$out/figure.json\"\n\
         echo '{{\"outcome\":\"ok\",\"stderr_tail\":\"\",\"duration_ms\":1}}' > \"$out/status.json\"\n",
        log = log.display(),
        fig = figure.display()
    );
    let p = write(dir, "executor.sh", &body);
    std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
    p
}

#[cfg(unix)]
#[test]
fn scripts_run_through_the_executor_once() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fig = core_fixture("bar.figure.json");
    let exe = fake_executor(d, &fig);
    write(d, "gen.py", "import plotly\n");
    let manifest = write(
        d,
        "m.jsonl",
        &format!("{{\"id\":\"x\",\"gt_figure\":\"{}\",\"candidate\":\"gen.py\"}}\n", fig.display()),
    );
    let out = d.join("out");
    let mut cfg = RunConfig::new(Task::Code, &manifest, &out);
    cfg.executor = Some(exe.display().to_string());
    run(&cfg).unwrap();
    let r = read_report(&out, "report.json");
    assert!((r["report"]["samples"][0]["overall"].as_f64().unwrap() - 100.0).abs() < 1e-9);

    // Cached: no executor needed, and it is not called again.
    cfg.executor = None;
    run(&cfg).unwrap();
    let calls = std::fs::read_to_string(d.join("calls.log")).unwrap();
    assert_eq!(calls.lines().count(), 1);
}

#[test]
fn uncached_scripts_need_an_executor() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "gen.py", "import plotly\n");
    let manifest = write(
        d,
        "m.jsonl",
        &format!("{{\"id\":\"x\",\"gt_figure\":\"{}\",\"candidate\":\"gen.py\"}}\n", core_fixture("bar.figure.json").display()),
    );
    let err = run(&RunConfig::new(Task::Code, &manifest, d.join("out"))).unwrap_err();
    assert!(matches!(err, CliError::ExecutorUnavailable(_)));
    let err = run(&RunConfig::new(Task::Score, &manifest, d.join("out"))).unwrap_err();
    assert!(matches!(err, CliError::Manifest { .. }));
}

#[test]
fn missing_candidates_are_scored_as_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let manifest = write(
        d,
        "m.jsonl",
        &format!("{{\"id\":\"x\",\"gt_figure\":\"{}\",\"candidate\":\"nothing.json\"}}\n", core_fixture("bar.figure.json").display()),
    );
    let out = d.join("out");
    let summary = run_task(Task::Score, &manifest, &out);
    assert_eq!((summary.samples, summary.passed), (1, 0));
    let r = read_report(&out, "report.json");
    assert_eq!(r["report"]["samples"][0]["status"], "parse_error");
    assert_eq!(r["report"]["corpus"]["overall"], 0.0);
}

#[test]
fn generate_writes_deterministic_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "sales.csv", "Quarter,Sales\nQ1,3\nQ2,5\nQ3,4\n");
    write(d, "neg.csv", "Part,Share\na,-1\n");
    let manifest = write(
        d,
        "g.jsonl",
        "{\"id\":\"s1\",\"table\":\"sales.csv\",\"chart_type\":\"bar\",\"title\":\"Sales by quarter\"}\n\
         {\"id\":\"s2\",\"table\":\"sales.csv\",\"library\":\"matplotlib\"}\n\
         {\"id\":\"s3\",\"table\":\"neg.csv\",\"chart_type\":\"pie\"}\n",
    );
    let (a, b) = (d.join("a"), d.join("b"));
    let mut cfg = RunConfig::new(Task::Generate, &manifest, &a);
    cfg.seed = 9;
    let s = run(&cfg).unwrap();
    assert_eq!((s.samples, s.passed), (3, 2));
    cfg.out = b.clone();
    run(&cfg).unwrap();
    for f in ["scripts/s1.py", "scripts/s2.py"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    assert!(std::fs::read_to_string(a.join("scripts/s2.py")).unwrap().contains("matplotlib"));
    let r = read_report(&a, "generate_report.json");
    assert_eq!(r["report"]["skipped"][0]["id"], "s3");
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = table_corpus(dir.path(), &[PERFECT_OUTPUT]);
    let bin = env!("CARGO_BIN_EXE_chartground");
    let ok = Command::new(bin)
        .args(["--task", "table", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = Command::new(bin)
        .args(["--task", "table", "--manifest", "/nonexistent.jsonl", "--out"])
        .arg(dir.path().join("out2"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(5));
    let cfg = Command::new(bin)
        .args(["--task", "dedup", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(dir.path().join("out3"))
        .output()
        .unwrap();
    assert_eq!(cfg.status.code(), Some(2));
}
