use chartground::color::{color_set_fidelity, delta_e_2000, ColorValue, LabColor};
use chartground::extract::DataTuple;
use chartground::matching::{fidelity_metrics, match_tuples, MatchOptions, MatchResult, ToleranceLevel};
use chartground::qa::table_signature;
use chartground::structure::string_similarity;
use chartground::synth::{contrast_ratio, ensure_contrast, sample_style_config, wrap_title};
use chartground::table::{HeaderSet, Table};
use chartground::Scalar;
use proptest::prelude::*;

fn lab() -> impl Strategy<Value = LabColor> {
    (0.0..100.0f64, -128.0..128.0f64, -128.0..128.0f64).prop_map(|(l, a, b)| LabColor::new(l, a, b))
}

fn color() -> impl Strategy<Value = ColorValue> {
    any::<[u8; 3]>().prop_map(|[r, g, b]| ColorValue::rgb(r, g, b))
}

fn field() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        (0u8..4).prop_map(|k| Scalar::str(["alpha", "alpah", "beta", "gamma"][k as usize])),
        (-3i32..30).prop_map(|k| Scalar::Num(k as f64 * 1.5)),
        (0.0..100.0f64).prop_map(Scalar::Num),
    ]
}

fn tuples(max: usize) -> impl Strategy<Value = Vec<DataTuple>> {
    prop::collection::vec(prop::collection::vec(field(), 2).prop_map(DataTuple::new), 0..max)
}

proptest! {
    #[test]
    fn delta_e_symmetric_and_non_negative(x in lab(), y in lab()) {
        let a = delta_e_2000(x, y).delta_e;
        let b = delta_e_2000(y, x).delta_e;
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(delta_e_2000(x, x).delta_e.abs() < 1e-12);
    }

    #[test]
    fn color_fidelity_permutation_invariant(gen in prop::collection::vec(color(), 0..6), reference in prop::collection::vec(color(), 0..6), rot in 0usize..6) {
        let f = color_set_fidelity(&gen, &reference);
        prop_assert!((0.0..=1.0).contains(&f));
        let mut g2 = gen.clone();
        if !g2.is_empty() {
            let k = rot % g2.len();
            g2.rotate_left(k);
        }
        prop_assert!((color_set_fidelity(&g2, &reference) - f).abs() < 1e-9);
        prop_assert!((color_set_fidelity(&reference, &gen) - f).abs() < 1e-9);
    }

    #[test]
    fn tolerance_levels_are_monotone(pred in tuples(8), gt in tuples(8)) {
        let n = |level| match_tuples(&pred, &gt, level, MatchOptions::default()).n_m;
        let (s, l, h) = (n(ToleranceLevel::Strict), n(ToleranceLevel::Slight), n(ToleranceLevel::High));
        prop_assert!(s <= l && l <= h, "{s} {l} {h}");
    }

    #[test]
    fn match_count_ignores_order(pred in tuples(8), gt in tuples(8), rot in 0usize..8) {
        let base = match_tuples(&pred, &gt, ToleranceLevel::Slight, MatchOptions::default());
        let mut p2 = pred.clone();
        if !p2.is_empty() {
            let k = rot % p2.len();
            p2.rotate_left(k);
        }
        let again = match_tuples(&p2, &gt, ToleranceLevel::Slight, MatchOptions::default());
        prop_assert_eq!(base.n_m, again.n_m);
        prop_assert!(base.n_m <= pred.len().min(gt.len()));
        let strict_swapped = match_tuples(&gt, &pred, ToleranceLevel::Strict, MatchOptions::default());
        let strict = match_tuples(&pred, &gt, ToleranceLevel::Strict, MatchOptions::default());
        prop_assert_eq!(strict.n_m, strict_swapped.n_m);
    }

    #[test]
    fn iou_f1_identity(n_p in 0usize..50, n_gt in 0usize..50, frac in 0.0..=1.0f64) {
        let n_m = (frac * n_p.min(n_gt) as f64).floor() as usize;
        let m = fidelity_metrics(&MatchResult::counts(n_m, n_p, n_gt));
        prop_assert!((m.iou - m.f1 / (2.0 - m.f1)).abs() < 1e-12);
        for v in [m.precision, m.recall, m.f1, m.iou] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let swapped = fidelity_metrics(&MatchResult::counts(n_m, n_gt, n_p));
        prop_assert_eq!(m.precision, swapped.recall);
        prop_assert_eq!(m.recall, swapped.precision);
    }

    #[test]
    fn string_similarity_bounded_and_symmetric(a in "[a-zA-Z ]{0,12}", b in "[a-zA-Z ]{0,12}") {
        let s = string_similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, string_similarity(&b, &a));
        prop_assert_eq!(string_similarity(&a, &a), 1.0);
    }

    #[test]
    fn sampled_styles_stay_in_range(seed in any::<u64>()) {
        prop_assert!(sample_style_config(seed).in_ranges());
    }

    #[test]
    fn ensure_contrast_meets_threshold(fg in color(), bg in color()) {
        let out = ensure_contrast(fg, bg, 3.0);
        // Mid-luminance backgrounds cannot reach 3:1 against either pole.
        let reachable = contrast_ratio(ColorValue::BLACK, bg).max(contrast_ratio(ColorValue::WHITE, bg)) >= 3.0;
        if reachable {
            prop_assert!(contrast_ratio(out, bg) >= 3.0);
        }
    }

    #[test]
    fn wrapped_lines_fit_and_preserve_words(words in prop::collection::vec("[a-z]{1,12}", 0..30), width in 12usize..80) {
        let text = words.join(" ");
        let lines = wrap_title(&text, width);
        prop_assert!(lines.iter().all(|l| l.chars().count() <= width));
        prop_assert_eq!(lines.join(" "), text);
    }

    #[test]
    fn signature_ignores_row_order(values in prop::collection::vec((0u8..3, -1000i32..1000, 0.0..10.0f64), 1..20), rot in 0usize..20) {
        // Unique mode: "hub" appears more often than any other label.
        let mut rows: Vec<Vec<Scalar>> = values
            .iter()
            .map(|(k, n, x)| vec![Scalar::str(format!("c{k}")), Scalar::Num(*n as f64), Scalar::Num(*x)])
            .collect();
        for _ in 0..=values.len() {
            rows.push(vec![Scalar::str("hub"), Scalar::Num(1.0), Scalar::Num(0.5)]);
        }
        let h = HeaderSet::new(&["c", "n", "x"]).unwrap();
        let a = table_signature(&Table::new(h.clone(), rows.clone()).unwrap());
        let k = rot % rows.len();
        rows.rotate_left(k);
        rows.reverse();
        let b = table_signature(&Table::new(h, rows).unwrap());
        prop_assert_eq!(a, b);
    }
}
