use chartground::color::{parse_color, ColorValue, Hsv};
use chartground::synth::{
    contrast_ratio, emit_plot_script, expected_tuples, perturb_hsv, sample_style_config, EmitOptions, PerturbMode,
    PlotLibrary, SCRIPT_CHART_TYPES,
};
use chartground::table::Table;
use chartground::ChartType;

fn hue_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn toggle_frequencies_match_probabilities() {
    let n = 10_000;
    let styles: Vec<_> = (0..n).map(sample_style_config).collect();
    let grid = styles.iter().filter(|s| s.grid_on).count() as f64 / n as f64;
    let legend = styles.iter().filter(|s| s.legend_on).count() as f64 / n as f64;
    assert!((grid - 0.70).abs() <= 0.02, "grid {grid}");
    assert!((legend - 0.80).abs() <= 0.02, "legend {legend}");
}

#[test]
fn hue_shifts_respect_their_bounds() {
    for seed in 0..1000 {
        let style = sample_style_config(seed);
        let base = style.base();
        let same = perturb_hsv(base, PerturbMode::SameFamily, &style);
        assert!(hue_gap(same.h, base.h) <= 0.2 + 1e-12, "seed {seed}");
        let comp = perturb_hsv(base, PerturbMode::Complementary, &style);
        assert!(hue_gap(comp.h, (base.h + 0.5).rem_euclid(1.0)) <= 0.05 + 1e-12, "seed {seed}");
        for h in [same, comp] {
            assert!((0.0..=1.0).contains(&h.s) && (0.0..=1.0).contains(&h.v));
        }
    }
    let neutral = chartground::synth::StyleConfig::neutral(Hsv { h: 0.9, s: 0.5, v: 0.5 });
    let c = perturb_hsv(neutral.base(), PerturbMode::Complementary, &neutral);
    assert!((c.h - 0.4).abs() < 1e-12);
}

fn hex_colors(script: &str) -> Vec<ColorValue> {
    let mut out = Vec::new();
    let bytes = script.as_bytes();
    for (i, _) in script.match_indices("\"#") {
        let end = i + 8;
        if end < bytes.len() && bytes[end] == b'"' {
            out.push(parse_color(&script[i + 1..end]).unwrap());
        }
    }
    out
}

#[test]
fn every_declared_foreground_contrasts_with_the_background() {
    let table = Table::from_csv("Month,North,South\nJan,3,4\nFeb,5,2\nMar,4,6\n").unwrap();
    let pie = Table::from_csv("Part,Share\nA,3\nB,5\nC,2\n").unwrap();
    for seed in 0..1000u64 {
        let style = sample_style_config(seed);
        let t = SCRIPT_CHART_TYPES[(seed % 5) as usize];
        let library = if seed % 2 == 0 { PlotLibrary::Plotly } else { PlotLibrary::Matplotlib };
        let src = if t == ChartType::Pie { &pie } else { &table };
        let opts = EmitOptions { library, title: Some("Monthly totals".into()), ..Default::default() };
        let art = emit_plot_script(src, t, &style, &opts).unwrap();
        let bg = art.palette.background;
        for fg in art.palette.foregrounds() {
            assert!(contrast_ratio(fg, bg) >= 3.0, "seed {seed}: {fg} on {bg}");
        }
        for c in hex_colors(&art.script_text) {
            assert!(c == bg || contrast_ratio(c, bg) >= 3.0, "seed {seed}: {c} in script");
        }
    }
}

#[test]
fn scripts_embed_every_expected_value() {
    let table = Table::from_csv("Year,Alpha,Beta\n2020,1.5,7\n2021,2.25,8\n").unwrap();
    for t in [ChartType::Bar, ChartType::Line, ChartType::Scatter, ChartType::Areachart] {
        let art = emit_plot_script(&table, t, &sample_style_config(3), &EmitOptions::default()).unwrap();
        let expected = expected_tuples(&table, t);
        assert_eq!(expected.len(), 4);
        for tuple in expected {
            let name = format!("\"{}\"", tuple.values[0].as_text().unwrap());
            assert!(art.script_text.contains(&name), "{t}: {name}");
        }
        assert!(art.script_text.contains("[1.5, 2.25]") && art.script_text.contains("[7.0, 8.0]"));
        assert!(art.script_text.contains("[2020.0, 2021.0]"));
    }
}

#[test]
fn style_attributes_reach_the_script() {
    let table = Table::from_csv("k,v\na,1\nb,2\n").unwrap();
    let style = sample_style_config(11);
    let art = emit_plot_script(&table, ChartType::Line, &style, &EmitOptions { library: PlotLibrary::Matplotlib, ..Default::default() }).unwrap();
    assert!(art.script_text.contains(&format!("figsize=({:.3}, {:.3})", style.fig_w, style.fig_h)));
    assert!(art.script_text.contains(&format!("linewidth={:.2}", style.line_width)));
    assert!(art.script_text.contains(&format!("labelsize={}", style.tick_font)));
    assert_eq!(art.script_text.contains("ax.legend("), style.legend_on);
}
