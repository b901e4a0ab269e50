//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every criterion reports even when an earlier one fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use chartground::color::{color_set_fidelity, delta_e_2000, ColorValue, LabColor};
use chartground::extract::{extract_tuples, DataTuple, TupleSet};
use chartground::matching::{
    fidelity_metrics, match_tuple_sets, match_tuples, tuple_match, LevelMetrics, MatchOptions, MatchResult, ToleranceLevel,
};
use chartground::qa::{dedup_by, run_filters, table_signature, ExecOutcome, FilterLimits, TripleRecord};
use chartground::report::{score_sample, GenStatus, SampleBundle, Weights};
use chartground::structure::{structure_scores, StructureConfig};
use chartground::table::{evaluate_table, Table};
use chartground::{load_figure, ChartType, FigureSource, Scalar};
use chartground_cli::{run, OutputFormat, RunConfig, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// CIEDE2000, coded from the published formula in degrees.

fn oracle_delta_e(l1: f64, a1: f64, b1: f64, l2: f64, a2: f64, b2: f64) -> f64 {
    let deg = |r: f64| r.to_degrees();
    let rad = |d: f64| d.to_radians();
    let pow25_7 = 25f64.powi(7);
    let c1 = (a1 * a1 + b1 * b1).sqrt();
    let c2 = (a2 * a2 + b2 * b2).sqrt();
    let cbar = (c1 + c2) / 2.0;
    let g = 0.5 * (1.0 - (cbar.powi(7) / (cbar.powi(7) + pow25_7)).sqrt());
    let ap1 = (1.0 + g) * a1;
    let ap2 = (1.0 + g) * a2;
    let cp1 = (ap1 * ap1 + b1 * b1).sqrt();
    let cp2 = (ap2 * ap2 + b2 * b2).sqrt();
    let hue = |b: f64, ap: f64| {
        if b == 0.0 && ap == 0.0 {
            0.0
        } else {
            let h = deg(b.atan2(ap));
            if h < 0.0 {
                h + 360.0
            } else {
                h
            }
        }
    };
    let hp1 = hue(b1, ap1);
    let hp2 = hue(b2, ap2);

    let dl = l2 - l1;
    let dc = cp2 - cp1;
    let dh_small = if cp1 * cp2 == 0.0 {
        0.0
    } else if (hp2 - hp1).abs() <= 180.0 {
        hp2 - hp1
    } else if hp2 - hp1 > 180.0 {
        hp2 - hp1 - 360.0
    } else {
        hp2 - hp1 + 360.0
    };
    let dh = 2.0 * (cp1 * cp2).sqrt() * rad(dh_small / 2.0).sin();

    let lbar = (l1 + l2) / 2.0;
    let cpbar = (cp1 + cp2) / 2.0;
    let hbar = if cp1 * cp2 == 0.0 {
        hp1 + hp2
    } else if (hp1 - hp2).abs() <= 180.0 {
        (hp1 + hp2) / 2.0
    } else if hp1 + hp2 < 360.0 {
        (hp1 + hp2 + 360.0) / 2.0
    } else {
        (hp1 + hp2 - 360.0) / 2.0
    };
    let t = 1.0 - 0.17 * rad(hbar - 30.0).cos() + 0.24 * rad(2.0 * hbar).cos() + 0.32 * rad(3.0 * hbar + 6.0).cos()
        - 0.20 * rad(4.0 * hbar - 63.0).cos();
    let dtheta = 30.0 * (-((hbar - 275.0) / 25.0).powi(2)).exp();
    let rc = 2.0 * (cpbar.powi(7) / (cpbar.powi(7) + pow25_7)).sqrt();
    let sl = 1.0 + 0.015 * (lbar - 50.0).powi(2) / (20.0 + (lbar - 50.0).powi(2)).sqrt();
    let sc = 1.0 + 0.045 * cpbar;
    let sh = 1.0 + 0.015 * cpbar * t;
    let rt = -rad(2.0 * dtheta).sin() * rc;
    ((dl / sl).powi(2) + (dc / sc).powi(2) + (dh / sh).powi(2) + rt * (dc / sc) * (dh / sh)).sqrt()
}

fn ciede2000() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2000);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p: [f64; 6] = [
            rng.gen_range(0.0..100.0),
            rng.gen_range(-128.0..128.0),
            rng.gen_range(-128.0..128.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(-128.0..128.0),
            rng.gen_range(-128.0..128.0),
        ];
        let got = delta_e_2000(LabColor::new(p[0], p[1], p[2]), LabColor::new(p[3], p[4], p[5])).delta_e;
        let want = oracle_delta_e(p[0], p[1], p[2], p[3], p[4], p[5]);
        worst = worst.max((got - want).abs());
        let same = delta_e_2000(LabColor::new(p[0], p[1], p[2]), LabColor::new(p[0], p[1], p[2])).delta_e;
        ensure(same == 0.0, || format!("dE(c, c) = {same}"))?;
    }
    ensure(worst <= 1e-6, || format!("max deviation from oracle {worst:e}"))?;
    let bw = delta_e_2000(ColorValue::BLACK.to_lab(), ColorValue::WHITE.to_lab()).delta_e;
    ensure((bw - 100.0).abs() <= 1e-9, || format!("dE(black, white) = {bw}"))
}

// ---------------------------------------------------------------------------
// Assignment optimality against exhaustive enumeration.

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_color_fidelity(gen: &[ColorValue], reference: &[ColorValue], perms: &[Vec<Vec<usize>>]) -> f64 {
    let n = gen.len().max(reference.len());
    if n == 0 {
        return 1.0;
    }
    let cost = |i: usize, j: usize| {
        if i < gen.len() && j < reference.len() {
            delta_e_2000(gen[i].to_lab(), reference[j].to_lab()).delta_e.min(100.0)
        } else {
            100.0
        }
    };
    let best = perms[n]
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    1.0 - best / (100.0 * n as f64)
}

/// Every partial one-to-one matching; returns (max cardinality, min summed
/// error among maximum matchings).
fn brute_matching(errs: &[Vec<Option<f64>>], n_gt: usize) -> (usize, f64) {
    fn go(i: usize, used: &mut Vec<bool>, errs: &[Vec<Option<f64>>], count: usize, err: f64, best: &mut (usize, f64)) {
        if i == errs.len() {
            if count > best.0 || (count == best.0 && err < best.1) {
                *best = (count, err);
            }
            return;
        }
        go(i + 1, used, errs, count, err, best);
        for j in 0..used.len() {
            if let (false, Some(e)) = (used[j], errs[i][j]) {
                used[j] = true;
                go(i + 1, used, errs, count + 1, err + e, best);
                used[j] = false;
            }
        }
    }
    let mut best = (0, 0.0);
    go(0, &mut vec![false; n_gt], errs, 0, 0.0, &mut best);
    best
}

fn random_color(rng: &mut ChaCha8Rng) -> ColorValue {
    // Small palette so near-duplicates and exact ties are common.
    if rng.gen_bool(0.3) {
        [ColorValue::rgb(255, 0, 0), ColorValue::rgb(250, 5, 5), ColorValue::BLACK, ColorValue::WHITE][rng.gen_range(0..4)]
    } else {
        ColorValue::rgb(rng.gen(), rng.gen(), rng.gen())
    }
}

fn random_field(rng: &mut ChaCha8Rng, kind: usize) -> Scalar {
    if kind == 0 {
        const WORDS: [&str; 6] = ["north", "north", "south", "soutth", "east", "westward"];
        Scalar::str(WORDS[rng.gen_range(0..WORDS.len())])
    } else {
        let base = [0.0, 10.0, 20.0, 100.0][rng.gen_range(0..4)];
        Scalar::Num(base * (1.0 + rng.gen_range(-0.12..0.12)) + if base == 0.0 { rng.gen_range(-0.2..0.2) } else { 0.0 })
    }
}

fn random_tuples(rng: &mut ChaCha8Rng, n: usize, arity: usize) -> Vec<DataTuple> {
    (0..n).map(|_| DataTuple::new((0..arity).map(|k| random_field(rng, k.min(1))).collect())).collect()
}

fn assignment_optimality() -> Outcome {
    let perms: Vec<Vec<Vec<usize>>> = (0..=7).map(permutations).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..500 {
        let gen: Vec<ColorValue> = (0..rng.gen_range(0..=7)).map(|_| random_color(&mut rng)).collect();
        let reference: Vec<ColorValue> = (0..rng.gen_range(0..=7)).map(|_| random_color(&mut rng)).collect();
        let got = color_set_fidelity(&gen, &reference);
        let want = brute_color_fidelity(&gen, &reference, &perms);
        ensure((got - want).abs() <= 1e-9, || format!("color case {case}: {got} vs brute force {want}"))?;
    }
    for case in 0..500 {
        let arity = rng.gen_range(2..=3);
        let n_pred = rng.gen_range(0..=7);
        let pred = random_tuples(&mut rng, n_pred, arity);
        let n_gt = rng.gen_range(0..=7);
        let gt = random_tuples(&mut rng, n_gt, arity);
        let level = ToleranceLevel::ALL[case % 3];
        let opts = MatchOptions::default();
        let errs: Vec<Vec<Option<f64>>> =
            pred.iter().map(|p| gt.iter().map(|q| tuple_match(p, q, level, opts)).collect()).collect();
        let (n_m, min_err) = brute_matching(&errs, gt.len());
        let (m, diag) = match_tuple_sets(&TupleSet::new(None, pred.clone()), &TupleSet::new(None, gt.clone()), level);
        ensure(diag.is_none(), || format!("tuple case {case}: unexpected diagnostic"))?;
        ensure(m.n_m == n_m, || format!("tuple case {case}: n_m {} vs brute force {n_m}", m.n_m))?;
        let err: f64 = m.assignment.iter().map(|&(i, j)| errs[i][j].expect("assigned pairs are compatible")).sum();
        ensure((err - min_err).abs() <= 1e-9, || format!("tuple case {case}: error {err} vs brute force {min_err}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for case in 0..1000 {
        let n_p = rng.gen_range(0..60);
        let n_gt = rng.gen_range(0..60);
        let n_m = rng.gen_range(0..=n_p.min(n_gt));
        let m = fidelity_metrics(&MatchResult::counts(n_m, n_p, n_gt));
        let identity = m.f1 / (2.0 - m.f1);
        ensure((m.iou - identity).abs() <= 1e-12, || format!("case {case}: IoU {} vs F1/(2-F1) {identity}", m.iou))?;
        let s = fidelity_metrics(&MatchResult::counts(n_m, n_gt, n_p));
        ensure(m.precision == s.recall && m.recall == s.precision && m.f1 == s.f1, || format!("case {case}: swap asymmetry"))?;
    }
    for case in 0..1000 {
        let arity = rng.gen_range(2..=4);
        let n_pred = rng.gen_range(0..10);
        let pred = random_tuples(&mut rng, n_pred, arity);
        let n_gt = rng.gen_range(0..10);
        let gt = random_tuples(&mut rng, n_gt, arity);
        let n = |level| match_tuples(&pred, &gt, level, MatchOptions::default()).n_m;
        let (s, l, h) = (n(ToleranceLevel::Strict), n(ToleranceLevel::Slight), n(ToleranceLevel::High));
        ensure(s <= l && l <= h, || format!("case {case}: strict {s}, slight {l}, high {h}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn worked_examples() -> Outcome {
    let paris = Table::from_csv("City,Category,Score\nParis,A,88.0\nParis,B,92.0\nLondon,A,84.0\nLondon,B,94.0\n")
        .map_err(|e| e.to_string())?;
    let sig = table_signature(&paris);
    ensure(sig.compat == "categorical4Pariscategorical4Aquantitative489.5", || format!("compat {:?}", sig.compat))?;

    let gold = Table::from_csv(common::GOLD_CSV).map_err(|e| e.to_string())?;
    let eval = evaluate_table(common::PERFECT_OUTPUT, &gold);
    ensure(eval.pass && eval.metrics.strict.f1 == 1.0, || format!("gold self-comparison {:?}", eval.metrics.strict))?;

    let perturbed = common::PERFECT_OUTPUT.replacen("63,000", "66,000", 1);
    let eval = evaluate_table(&perturbed, &gold);
    let matched = |level| eval.metrics.get(level).recall * 3.0;
    ensure(
        (matched(ToleranceLevel::Strict) - 2.0).abs() < 1e-12
            && (matched(ToleranceLevel::Slight) - 3.0).abs() < 1e-12
            && (matched(ToleranceLevel::High) - 3.0).abs() < 1e-12,
        || format!("63,000 -> 66,000 row counts: {:?}", eval.metrics),
    )?;

    let price_current = Scalar::from_cell("100,000.0");
    let field = |level| chartground::matching::field_match(&Scalar::Num(104_000.0), &price_current, level);
    ensure(price_current.as_f64() == Some(100_000.0), || format!("gold cell parsed as {price_current:?}"))?;
    let e = chartground::matching::relative_error(104_000.0, 100_000.0);
    ensure((e - 0.04).abs() < 1e-12, || format!("relative error {e}"))?;
    ensure(field(ToleranceLevel::Slight) && !field(ToleranceLevel::Strict), || "104,000 vs 100,000.0 verdicts".into())
}

// ---------------------------------------------------------------------------

fn self_comparison_suite() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/figures");
    for t in ChartType::ALL {
        let path = dir.join(format!("{}.figure.json", t.as_str()));
        let spec = load_figure(&path, FigureSource::GroundTruth).map_err(|e| format!("{t}: {e}"))?;
        ensure(spec.primary_chart_type() == Some(t), || format!("{t}: fixture has type {:?}", spec.primary_chart_type()))?;
        let s = structure_scores(&spec, &spec, &StructureConfig::default());
        ensure(s.text.avg == 1.0 && s.color == 1.0 && s.chart_type == 1.0 && s.layout == 1.0, || format!("{t}: {s:?}"))?;
        let tuples = extract_tuples(&spec).pooled();
        ensure(!tuples.is_empty(), || format!("{t}: no tuples"))?;
        let m = LevelMetrics::evaluate(&tuples, &tuples, MatchOptions::default());
        for level in ToleranceLevel::ALL {
            ensure(m.get(level).iou == 1.0, || format!("{t}: IoU {} at {level}", m.get(level).iou))?;
        }
        let bundle = SampleBundle {
            id: t.to_string(),
            gt_figure: spec.clone(),
            gt_table: None,
            gt_image: None,
            gen_figure: Some(spec),
            gen_status: GenStatus::Ok,
            embeddings: None,
        };
        let r = score_sample(&bundle, &Weights::default(), &StructureConfig::default());
        ensure((r.overall - 100.0).abs() < 1e-9, || format!("{t}: overall {}", r.overall))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn pass_rate_arithmetic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = common::table_corpus(
        dir.path(),
        &[common::PERFECT_OUTPUT, common::REORDERED_OUTPUT, "The chart shows a rising trend.", common::PERFECT_OUTPUT],
    );
    let out = dir.path().join("out");
    let mut cfg = RunConfig::new(Task::Table, &manifest, &out);
    cfg.format = OutputFormat::Csv;
    run(&cfg).map_err(|e| e.to_string())?;
    let summary = std::fs::read_to_string(out.join("summary.csv")).map_err(|e| e.to_string())?;
    let corpus = summary.lines().nth(1).unwrap_or_default().to_string();
    ensure(corpus.starts_with("all,4,75.00,"), || format!("summary row {corpus:?}"))?;

    cfg.format = OutputFormat::Json;
    run(&cfg).map_err(|e| e.to_string())?;
    let r = common::read_report(&out, "report.json");
    let failed = &r["report"]["samples"][2];
    ensure(failed["pass"] == false, || format!("sample s2 {failed}"))?;
    for level in ["strict", "slight", "high"] {
        for k in ["precision", "recall", "f1", "iou"] {
            ensure(failed["metrics"][level][k] == 0.0, || format!("s2 {level}.{k} = {}", failed["metrics"][level][k]))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn qa_conservation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut records = Vec::new();
    for i in 0..50 {
        let table = d.join(format!("t{i}.csv"));
        let figure = d.join(format!("f{i}.json"));
        let script = d.join(format!("s{i}.py"));
        // A handful of distinct tables so duplicates occur.
        let k = rng.gen_range(0..12);
        let body = format!("label,value\nx{k},{}\ny,{}\n", k * 3, k + 1);
        if rng.gen_bool(0.9) {
            std::fs::write(&table, body).map_err(|e| e.to_string())?;
        }
        std::fs::write(&figure, "{}").map_err(|e| e.to_string())?;
        let len = if rng.gen_bool(0.15) { 5000 } else { 200 };
        std::fs::write(&script, "#".repeat(len)).map_err(|e| e.to_string())?;
        let mut r = TripleRecord::new(format!("r{i:02}"), table, figure, script);
        r.exec_status = match rng.gen_range(0..4) {
            0 => Some(ExecOutcome::ExecError),
            1 => None,
            _ => Some(ExecOutcome::Ok),
        };
        records.push(r);
    }
    let report = run_filters(records, FilterLimits { max_code_chars: 1000 });
    let mut expected_input = 50;
    for s in &report.stages {
        ensure(s.input == expected_input, || format!("{:?}: input {} vs {expected_input}", s.stage, s.input))?;
        ensure(s.removed + s.retained == s.input, || format!("{:?}: {} + {} != {}", s.stage, s.removed, s.retained, s.input))?;
        ensure(s.removals.len() == s.removed, || format!("{:?}: removal list length", s.stage))?;
        expected_input = s.retained;
    }
    ensure(report.total_removed() + report.retained.len() == 50, || {
        format!("{} removed + {} retained != 50", report.total_removed(), report.retained.len())
    })?;
    ensure(report.stages.iter().all(|s| s.removed > 0), || format!("a stage removed nothing: {:?}", report.stages))?;

    let sig = |r: &TripleRecord| Table::load_csv(&r.table).ok().map(|t| table_signature(&t));
    let once = dedup_by(report.retained.clone(), sig);
    let twice = dedup_by(once.retained.clone(), sig);
    ensure(once.removed.is_empty() && twice.removed.is_empty() && twice.retained == once.retained, || {
        "dedup is not idempotent".into()
    })
}

// ---------------------------------------------------------------------------

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("CIEDE2000 correctness", Duration::from_secs(1), ciede2000),
        ("assignment optimality", Duration::from_secs(30), assignment_optimality),
        ("metric identities", Duration::from_secs(10), metric_identities),
        ("worked-example regressions", Duration::from_secs(1), worked_examples),
        ("30-type self-comparison suite", Duration::from_secs(10), self_comparison_suite),
        ("pass-rate arithmetic", Duration::from_secs(1), pass_rate_arithmetic),
        ("dataset-qa conservation", Duration::from_secs(1), qa_conservation),
    ];
    let mut failures = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(()) if elapsed <= limit => Ok(()),
            Ok(()) => Err(format!("took {elapsed:?}, limit {limit:?}")),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(()) => println!("PASS  {name}  ({} ms, limit {} ms)", elapsed.as_millis(), limit.as_millis()),
            Err(reason) => {
                failures += 1;
                println!("FAIL  {name}  ({} ms, limit {} ms): {reason}", elapsed.as_millis(), limit.as_millis());
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
