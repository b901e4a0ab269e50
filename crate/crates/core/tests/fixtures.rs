use std::collections::BTreeSet;
use std::path::PathBuf;

use chartground::extract::extract_tuples;
use chartground::figure::{parse_figure_spec, to_document};
use chartground::{load_figure, validate_figure_spec, ChartType, FigureSource, LevelMetrics, StructureConfig};
use chartground::matching::MatchOptions;
use chartground::structure::structure_scores;

fn fixtures() -> Vec<(ChartType, PathBuf)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/figures");
    ChartType::ALL.iter().map(|t| (*t, dir.join(format!("{}.figure.json", t.as_str())))).collect()
}

#[test]
fn every_chart_type_has_a_valid_fixture() {
    let mut seen = BTreeSet::new();
    for (t, path) in fixtures() {
        let spec = load_figure(&path, FigureSource::GroundTruth).unwrap_or_else(|e| panic!("{t}: {e}"));
        let report = validate_figure_spec(&spec);
        assert!(report.is_valid(), "{t}: {:?}", report.violations);
        assert!(spec.rejections.is_empty() && spec.notes.is_empty(), "{t}: {:?} {:?}", spec.rejections, spec.notes);
        assert_eq!(spec.primary_chart_type(), Some(t));
        assert!(spec.layout.title.is_some(), "{t}");
        assert!(!spec.layout.annotations.is_empty(), "{t}");
        assert!(!spec.colors().is_empty(), "{t}");
        seen.insert(t);
    }
    assert_eq!(seen.len(), 30);
}

#[test]
fn every_fixture_extracts_tuples() {
    for (t, path) in fixtures() {
        let spec = load_figure(&path, FigureSource::GroundTruth).unwrap();
        let ex = extract_tuples(&spec);
        assert!(ex.diagnostics.is_empty(), "{t}: {:?}", ex.diagnostics);
        assert!(ex.sets.iter().all(|s| !s.is_empty()), "{t}");
    }
}

#[test]
fn self_comparison_is_perfect() {
    for (t, path) in fixtures() {
        let spec = load_figure(&path, FigureSource::GroundTruth).unwrap();
        let s = structure_scores(&spec, &spec, &StructureConfig::default());
        assert_eq!((s.text.avg, s.color, s.chart_type, s.layout), (1.0, 1.0, 1.0, 1.0), "{t}: {s:?}");
        let tuples = extract_tuples(&spec).pooled();
        let m = LevelMetrics::evaluate(&tuples, &tuples, MatchOptions::default());
        for level in chartground::ToleranceLevel::ALL {
            assert_eq!(m.get(level).iou, 1.0, "{t} at {level}");
        }
    }
}

#[test]
fn canonical_documents_round_trip() {
    for (t, path) in fixtures() {
        let spec = load_figure(&path, FigureSource::GroundTruth).unwrap();
        let doc = serde_json::to_vec(&to_document(&spec)).unwrap();
        let back = parse_figure_spec(&doc, FigureSource::GroundTruth).unwrap();
        assert!(back.structurally_eq(&spec), "{t}");
    }
}
