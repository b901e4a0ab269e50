//! Parametric plotting-script generation with range-constrained style
//! augmentation.
//!
//! A [`StyleConfig`] is sampled deterministically from a seed; every numeric
//! attribute stays inside its closed range. Scripts embed their data inline
//! and are byte-identical for identical `(table, chart type, style, options)`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{ColorValue, Hsv};
use crate::extract::DataTuple;
use crate::figure::ChartType;
use crate::scalar::Scalar;
use crate::table::Table;

pub const HUE_SHIFT_RANGE: (f64, f64) = (-0.2, 0.2);
pub const SAT_SHIFT_RANGE: (f64, f64) = (-0.25, 0.25);
pub const VAL_SHIFT_RANGE: (f64, f64) = (-0.25, 0.25);
pub const LINE_WIDTH_RANGE: (f64, f64) = (1.2, 3.5);
pub const GRID_ALPHA_RANGE: (f64, f64) = (0.2, 0.6);
pub const TICK_FONT_RANGE: (u32, u32) = (8, 12);
pub const AXIS_FONT_RANGE: (u32, u32) = (10, 14);
pub const TITLE_FONT_RANGE: (u32, u32) = (12, 18);
/// 6 ± 3 units.
pub const FIG_WIDTH_RANGE: (f64, f64) = (3.0, 9.0);
/// 5 ± 2 units.
pub const FIG_HEIGHT_RANGE: (f64, f64) = (3.0, 7.0);
/// Hue jitter bound for complementary colors.
pub const COMPLEMENT_JITTER: f64 = 0.05;
pub const MIN_CONTRAST: f64 = 3.0;
pub const DEFAULT_TITLE_WIDTH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineStyle {
    Solid,
    Dashed,
    Dotted,
    Dashdot,
}

impl LineStyle {
    pub const ALL: [LineStyle; 4] = [LineStyle::Solid, LineStyle::Dashed, LineStyle::Dotted, LineStyle::Dashdot];

    fn matplotlib(self) -> &'static str {
        match self {
            LineStyle::Solid => "-",
            LineStyle::Dashed => "--",
            LineStyle::Dotted => ":",
            LineStyle::Dashdot => "-.",
        }
    }

    fn plotly(self) -> &'static str {
        match self {
            LineStyle::Solid => "solid",
            LineStyle::Dashed => "dash",
            LineStyle::Dotted => "dot",
            LineStyle::Dashdot => "dashdot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LegendPosition {
    TopRight,
    TopLeft,
    TopCenter,
    BottomRight,
    BottomLeft,
    BottomCenter,
}

impl LegendPosition {
    pub const ALL: [LegendPosition; 6] = [
        LegendPosition::TopRight,
        LegendPosition::TopLeft,
        LegendPosition::TopCenter,
        LegendPosition::BottomRight,
        LegendPosition::BottomLeft,
        LegendPosition::BottomCenter,
    ];

    fn matplotlib(self) -> &'static str {
        match self {
            LegendPosition::TopRight => "upper right",
            LegendPosition::TopLeft => "upper left",
            LegendPosition::TopCenter => "upper center",
            LegendPosition::BottomRight => "lower right",
            LegendPosition::BottomLeft => "lower left",
            LegendPosition::BottomCenter => "lower center",
        }
    }

    /// `(x, y, xanchor, yanchor)` in paper coordinates.
    fn plotly(self) -> (f64, f64, &'static str, &'static str) {
        match self {
            LegendPosition::TopRight => (1.0, 1.0, "right", "top"),
            LegendPosition::TopLeft => (0.0, 1.0, "left", "top"),
            LegendPosition::TopCenter => (0.5, 1.0, "center", "top"),
            LegendPosition::BottomRight => (1.0, 0.0, "right", "bottom"),
            LegendPosition::BottomLeft => (0.0, 0.0, "left", "bottom"),
            LegendPosition::BottomCenter => (0.5, 0.0, "center", "bottom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleConfig {
    pub base_hsv: (f64, f64, f64),
    pub hue_shift: f64,
    pub sat_shift: f64,
    pub val_shift: f64,
    pub line_width: f64,
    pub line_style: LineStyle,
    pub grid_on: bool,
    pub grid_alpha: f64,
    pub tick_font: u32,
    pub axis_font: u32,
    pub title_font: u32,
    pub legend_on: bool,
    pub legend_position: LegendPosition,
    pub fig_w: f64,
    pub fig_h: f64,
    pub rng_seed: u64,
}

impl StyleConfig {
    /// Every attribute at its neutral value: zero shifts, mid-range sizes.
    pub fn neutral(base: Hsv) -> Self {
        StyleConfig {
            base_hsv: (base.h, base.s, base.v),
            hue_shift: 0.0,
            sat_shift: 0.0,
            val_shift: 0.0,
            line_width: 2.0,
            line_style: LineStyle::Solid,
            grid_on: true,
            grid_alpha: 0.4,
            tick_font: 10,
            axis_font: 12,
            title_font: 14,
            legend_on: true,
            legend_position: LegendPosition::TopRight,
            fig_w: 6.0,
            fig_h: 5.0,
            rng_seed: 0,
        }
    }

    pub fn base(&self) -> Hsv {
        Hsv { h: self.base_hsv.0, s: self.base_hsv.1, v: self.base_hsv.2 }
    }

    /// Check every field against its range.
    pub fn in_ranges(&self) -> bool {
        let within = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
        let within_u = |v: u32, (lo, hi): (u32, u32)| (lo..=hi).contains(&v);
        let (h, s, v) = self.base_hsv;
        (0.0..1.0).contains(&h)
            && (0.0..=1.0).contains(&s)
            && (0.0..=1.0).contains(&v)
            && within(self.hue_shift, HUE_SHIFT_RANGE)
            && within(self.sat_shift, SAT_SHIFT_RANGE)
            && within(self.val_shift, VAL_SHIFT_RANGE)
            && within(self.line_width, LINE_WIDTH_RANGE)
            && within(self.grid_alpha, GRID_ALPHA_RANGE)
            && within_u(self.tick_font, TICK_FONT_RANGE)
            && within_u(self.axis_font, AXIS_FONT_RANGE)
            && within_u(self.title_font, TITLE_FONT_RANGE)
            && within(self.fig_w, FIG_WIDTH_RANGE)
            && within(self.fig_h, FIG_HEIGHT_RANGE)
    }
}

/// Toggle probabilities for the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub grid_probability: f64,
    pub legend_probability: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { grid_probability: 0.7, legend_probability: 0.8 }
    }
}

pub fn sample_style_config(seed: u64) -> StyleConfig {
    sample_style_config_with(seed, &SamplerConfig::default())
}

pub fn sample_style_config_with(seed: u64, sampler: &SamplerConfig) -> StyleConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |(lo, hi): (f64, f64)| rng.gen_range(lo..=hi);
    let base_hsv = (uniform((0.0, 1.0)) % 1.0, uniform((0.0, 1.0)), uniform((0.0, 1.0)));
    let hue_shift = uniform(HUE_SHIFT_RANGE);
    let sat_shift = uniform(SAT_SHIFT_RANGE);
    let val_shift = uniform(VAL_SHIFT_RANGE);
    let line_width = uniform(LINE_WIDTH_RANGE);
    let grid_alpha = uniform(GRID_ALPHA_RANGE);
    let fig_w = uniform(FIG_WIDTH_RANGE);
    let fig_h = uniform(FIG_HEIGHT_RANGE);
    let line_style = LineStyle::ALL[rng.gen_range(0..LineStyle::ALL.len())];
    let grid_on = rng.gen_bool(sampler.grid_probability);
    let tick_font = rng.gen_range(TICK_FONT_RANGE.0..=TICK_FONT_RANGE.1);
    let axis_font = rng.gen_range(AXIS_FONT_RANGE.0..=AXIS_FONT_RANGE.1);
    let title_font = rng.gen_range(TITLE_FONT_RANGE.0..=TITLE_FONT_RANGE.1);
    let legend_on = rng.gen_bool(sampler.legend_probability);
    let legend_position = LegendPosition::ALL[rng.gen_range(0..LegendPosition::ALL.len())];
    StyleConfig {
        base_hsv,
        hue_shift,
        sat_shift,
        val_shift,
        line_width,
        line_style,
        grid_on,
        grid_alpha,
        tick_font,
        axis_font,
        title_font,
        legend_on,
        legend_position,
        fig_w,
        fig_h,
        rng_seed: seed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    SameFamily,
    Complementary,
}

/// HSV-space perturbation. Same-family applies the configured hue shift;
/// complementary rotates the hue by half a turn plus a jitter of
/// `hue_shift / 4` (so within ±0.05). Saturation and value shifts apply
/// in both modes and are clamped to `[0, 1]`.
pub fn perturb_hsv(base: Hsv, mode: PerturbMode, cfg: &StyleConfig) -> Hsv {
    let dh = match mode {
        PerturbMode::SameFamily => cfg.hue_shift,
        PerturbMode::Complementary => 0.5 + cfg.hue_shift * (COMPLEMENT_JITTER / HUE_SHIFT_RANGE.1),
    };
    Hsv {
        h: (base.h + dh).rem_euclid(1.0),
        s: (base.s + cfg.sat_shift).clamp(0.0, 1.0),
        v: (base.v + cfg.val_shift).clamp(0.0, 1.0),
    }
}

pub fn perturb_color(base: ColorValue, mode: PerturbMode, cfg: &StyleConfig) -> ColorValue {
    let mut out = ColorValue::from_hsv(perturb_hsv(base.to_hsv(), mode, cfg));
    out.alpha = base.alpha;
    out
}

/// `(L_hi + 0.05) / (L_lo + 0.05)` over relative luminance.
pub fn contrast_ratio(fg: ColorValue, bg: ColorValue) -> f64 {
    let a = fg.relative_luminance();
    let b = bg.relative_luminance();
    (a.max(b) + 0.05) / (a.min(b) + 0.05)
}

/// Return `fg` if it already contrasts enough with `bg`; otherwise step
/// its HSV value toward the better pole, falling back to plain black or
/// white.
pub fn ensure_contrast(fg: ColorValue, bg: ColorValue, min_ratio: f64) -> ColorValue {
    if contrast_ratio(fg, bg) >= min_ratio {
        return fg;
    }
    let darken = contrast_ratio(ColorValue::BLACK, bg) >= contrast_ratio(ColorValue::WHITE, bg);
    let hsv = fg.to_hsv();
    const STEP: f64 = 0.05;
    let mut v = hsv.v;
    loop {
        v = if darken { (v - STEP).max(0.0) } else { (v + STEP).min(1.0) };
        let mut candidate = ColorValue::from_hsv(Hsv { v, ..hsv });
        candidate.alpha = fg.alpha;
        if contrast_ratio(candidate, bg) >= min_ratio {
            return candidate;
        }
        if v <= 0.0 || v >= 1.0 {
            break;
        }
    }
    let pole = if darken { ColorValue::BLACK } else { ColorValue::WHITE };
    ColorValue { alpha: fg.alpha, ..pole }
}

/// Greedy word wrap; a single word longer than `width` stays whole.
pub fn wrap_title(text: &str, width: usize) -> Vec<String> {
    let width = width.max(1);
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        let needed = if current.is_empty() { word.chars().count() } else { current.chars().count() + 1 + word.chars().count() };
        if !current.is_empty() && needed > width {
            lines.push(std::mem::take(&mut current));
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(word);
    }
    if !current.is_empty() || lines.is_empty() {
        lines.push(current);
    }
    lines
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotLibrary {
    Matplotlib,
    #[default]
    Plotly,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmitOptions {
    pub library: PlotLibrary,
    pub title: Option<String>,
    /// Identifier of the source table, recorded on the artifact.
    pub table_ref: String,
    pub title_width: Option<usize>,
}

/// Colors declared by a script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub background: ColorValue,
    pub text: ColorValue,
    pub grid: ColorValue,
    pub series: Vec<ColorValue>,
}

impl Palette {
    pub fn foregrounds(&self) -> impl Iterator<Item = ColorValue> + '_ {
        [self.text, self.grid].into_iter().chain(self.series.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptArtifact {
    pub script_text: String,
    pub chart_type: ChartType,
    pub source_table: String,
    pub style: StyleConfig,
    pub library: PlotLibrary,
    pub palette: Palette,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("table incompatible with {chart_type}: {reason}")]
    IncompatibleTable { chart_type: ChartType, reason: String },
}

pub const SCRIPT_CHART_TYPES: [ChartType; 5] =
    [ChartType::Bar, ChartType::Line, ChartType::Scatter, ChartType::Areachart, ChartType::Pie];

const GOLDEN_TURN: f64 = 0.618_033_988_749_895;

/// Derive all declared colors from the style against a white background.
pub fn derive_palette(style: &StyleConfig, series: usize) -> Palette {
    let background = ColorValue::WHITE;
    let base = style.base();
    let series = (0..series.max(1))
        .map(|k| {
            let rotated = Hsv { h: (base.h + k as f64 * GOLDEN_TURN).rem_euclid(1.0), ..base };
            let mode = if k % 2 == 1 { PerturbMode::Complementary } else { PerturbMode::SameFamily };
            let c = ColorValue::from_hsv(perturb_hsv(rotated, mode, style));
            ensure_contrast(c, background, MIN_CONTRAST)
        })
        .collect::<Vec<_>>();
    let text = ensure_contrast(
        ColorValue::from_hsv(perturb_hsv(Hsv { h: base.h, s: 0.15, v: 0.25 }, PerturbMode::SameFamily, style)),
        background,
        MIN_CONTRAST,
    );
    let grid = ensure_contrast(
        ColorValue::from_hsv(perturb_hsv(base, PerturbMode::SameFamily, style)),
        background,
        MIN_CONTRAST,
    );
    Palette { background, text, grid, series }
}

fn check_table(table: &Table, chart_type: ChartType) -> Result<(), SynthError> {
    let bad = |reason: &str| Err(SynthError::IncompatibleTable { chart_type, reason: reason.to_string() });
    if !SCRIPT_CHART_TYPES.contains(&chart_type) {
        return bad("script templates cover bar, line, scatter, areachart and pie only");
    }
    if table.rows.is_empty() {
        return bad("table has no rows");
    }
    let cols = table.headers.len();
    if chart_type == ChartType::Pie {
        if cols != 2 {
            return bad("pie needs exactly one label column and one value column");
        }
        let values = table.column(1);
        if values.iter().any(|v| v.as_f64().is_none()) {
            return bad("pie values must be numeric");
        }
        if values.iter().any(|v| v.as_f64().is_some_and(|x| x < 0.0)) {
            return bad("pie values must be non-negative");
        }
    } else {
        if cols < 2 {
            return bad("need an x column and at least one y column");
        }
        for k in 1..cols {
            if table.column(k).iter().any(|v| v.as_f64().is_none()) {
                return bad(&format!("column {:?} is not numeric", table.headers.as_slice()[k]));
            }
        }
    }
    if table.rows.iter().flatten().any(Scalar::is_null) {
        return bad("table contains null cells");
    }
    Ok(())
}

/// Tuples that executing the emitted script must reproduce: one
/// `(series, x, y)` per cell of each value column, or
/// `(value header, label, value)` for pies.
pub fn expected_tuples(table: &Table, chart_type: ChartType) -> Vec<DataTuple> {
    let headers = table.headers.as_slice();
    let mut out = Vec::new();
    for k in 1..headers.len() {
        for row in &table.rows {
            out.push(DataTuple::new(vec![Scalar::str(headers[k].clone()), row[0].clone(), row[k].clone()]));
        }
        if chart_type == ChartType::Pie {
            break;
        }
    }
    out
}

fn py_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn py_scalar(s: &Scalar) -> String {
    match s {
        Scalar::Num(v) => format!("{v:?}"),
        Scalar::Str(t) | Scalar::Date(t) => py_str(t),
        Scalar::Null => "None".into(),
    }
}

fn py_list(values: &[Scalar]) -> String {
    let items: Vec<String> = values.iter().map(py_scalar).collect();
    format!("[{}]", items.join(", "))
}

fn rgba(c: ColorValue, alpha: f64) -> String {
    format!("rgba({}, {}, {}, {:.3})", c.r, c.g, c.b, alpha)
}

/// Emit a self-contained plotting script for `table`.
pub fn emit_plot_script(
    table: &Table,
    chart_type: ChartType,
    style: &StyleConfig,
    opts: &EmitOptions,
) -> Result<ScriptArtifact, SynthError> {
    check_table(table, chart_type)?;
    let n_series = if chart_type == ChartType::Pie { table.rows.len() } else { table.headers.len() - 1 };
    let palette = derive_palette(style, n_series);
    let title_lines = opts
        .title
        .as_deref()
        .map(|t| wrap_title(t, opts.title_width.unwrap_or(DEFAULT_TITLE_WIDTH)));
    let script_text = match opts.library {
        PlotLibrary::Plotly => plotly_script(table, chart_type, style, &palette, title_lines.as_deref()),
        PlotLibrary::Matplotlib => matplotlib_script(table, chart_type, style, &palette, title_lines.as_deref()),
    };
    Ok(ScriptArtifact {
        script_text,
        chart_type,
        source_table: opts.table_ref.clone(),
        style: *style,
        library: opts.library,
        palette,
    })
}

fn plotly_script(table: &Table, chart_type: ChartType, style: &StyleConfig, palette: &Palette, title: Option<&[String]>) -> String {
    let headers = table.headers.as_slice();
    let x = table.column(0);
    let mut s = String::new();
    writeln!(s, "import plotly.graph_objects as go").unwrap();
    writeln!(s).unwrap();
    writeln!(s, "x = {}", py_list(&x)).unwrap();
    writeln!(s, "fig = go.Figure()").unwrap();

    if chart_type == ChartType::Pie {
        let colors: Vec<String> = palette.series.iter().map(|c| py_str(&c.hex())).collect();
        writeln!(
            s,
            "fig.add_trace(go.Pie(name={}, labels=x, values={}, marker=dict(colors=[{}], line=dict(color={}, width={:.2})), meta={{\"chart_type\": \"pie\"}}))",
            py_str(&headers[1]),
            py_list(&table.column(1)),
            colors.join(", "),
            py_str(&palette.background.hex()),
            style.line_width,
        )
        .unwrap();
    } else {
        for (k, header) in headers.iter().enumerate().skip(1) {
            let color = py_str(&palette.series[k - 1].hex());
            let name = py_str(header);
            let y = py_list(&table.column(k));
            let line = format!("line=dict(color={color}, width={:.2}, dash={})", style.line_width, py_str(style.line_style.plotly()));
            let meta = format!("meta={{\"chart_type\": \"{}\"}}", chart_type.as_str());
            let call = match chart_type {
                ChartType::Bar => format!("go.Bar(name={name}, x=x, y={y}, marker=dict(color={color}), {meta})"),
                ChartType::Line => format!("go.Scatter(name={name}, x=x, y={y}, mode=\"lines\", {line}, {meta})"),
                ChartType::Scatter => format!(
                    "go.Scatter(name={name}, x=x, y={y}, mode=\"markers\", marker=dict(color={color}, size={:.1}), {meta})",
                    style.line_width * 3.0
                ),
                _ => format!("go.Scatter(name={name}, x=x, y={y}, mode=\"lines\", fill=\"tozeroy\", fillcolor={}, {line}, {meta})", py_str(&rgba(palette.series[k - 1], 0.4))),
            };
            writeln!(s, "fig.add_trace({call})").unwrap();
        }
    }

    let (lx, ly, xa, ya) = style.legend_position.plotly();
    writeln!(s, "fig.update_layout(").unwrap();
    if let Some(lines) = title {
        writeln!(
            s,
            "    title=dict(text={}, font=dict(size={}, color={})),",
            py_str(&lines.join("<br>")),
            style.title_font,
            py_str(&palette.text.hex())
        )
        .unwrap();
    }
    writeln!(s, "    width={}, height={},", (style.fig_w * 100.0).round() as i64, (style.fig_h * 100.0).round() as i64).unwrap();
    writeln!(s, "    plot_bgcolor={0}, paper_bgcolor={0},", py_str(&palette.background.hex())).unwrap();
    writeln!(s, "    font=dict(color={}),", py_str(&palette.text.hex())).unwrap();
    writeln!(s, "    showlegend={},", if style.legend_on { "True" } else { "False" }).unwrap();
    writeln!(
        s,
        "    legend=dict(x={lx}, y={ly}, xanchor=\"{xa}\", yanchor=\"{ya}\", font=dict(size={})),",
        style.tick_font
    )
    .unwrap();
    writeln!(s, ")").unwrap();
    if chart_type != ChartType::Pie {
        let grid = if style.grid_on { "True" } else { "False" };
        let grid_color = py_str(&rgba(palette.grid, style.grid_alpha));
        writeln!(
            s,
            "fig.update_xaxes(title=dict(text={}, font=dict(size={})), tickfont=dict(size={}), showgrid={grid}, gridcolor={grid_color}, griddash={})",
            py_str(&headers[0]),
            style.axis_font,
            style.tick_font,
            py_str(style.line_style.plotly()),
        )
        .unwrap();
        let y_title = if headers.len() == 2 { headers[1].as_str() } else { "" };
        writeln!(
            s,
            "fig.update_yaxes(title=dict(text={}, font=dict(size={})), tickfont=dict(size={}), showgrid={grid}, gridcolor={grid_color}, griddash={})",
            py_str(y_title),
            style.axis_font,
            style.tick_font,
            py_str(style.line_style.plotly()),
        )
        .unwrap();
    }
    s
}

fn matplotlib_script(table: &Table, chart_type: ChartType, style: &StyleConfig, palette: &Palette, title: Option<&[String]>) -> String {
    let headers = table.headers.as_slice();
    let x = table.column(0);
    let mut s = String::new();
    writeln!(s, "import matplotlib").unwrap();
    writeln!(s, "matplotlib.use(\"Agg\")").unwrap();
    writeln!(s, "import matplotlib.pyplot as plt").unwrap();
    writeln!(s).unwrap();
    writeln!(s, "x = {}", py_list(&x)).unwrap();
    writeln!(s, "fig, ax = plt.subplots(figsize=({:.3}, {:.3}))", style.fig_w, style.fig_h).unwrap();
    writeln!(s, "fig.patch.set_facecolor({})", py_str(&palette.background.hex())).unwrap();
    writeln!(s, "ax.set_facecolor({})", py_str(&palette.background.hex())).unwrap();

    let ls = py_str(style.line_style.matplotlib());
    if chart_type == ChartType::Pie {
        let colors: Vec<String> = palette.series.iter().map(|c| py_str(&c.hex())).collect();
        writeln!(
            s,
            "ax.pie({}, labels=x, colors=[{}], wedgeprops=dict(edgecolor={}, linewidth={:.2}), textprops=dict(color={}, fontsize={}))",
            py_list(&table.column(1)),
            colors.join(", "),
            py_str(&palette.background.hex()),
            style.line_width,
            py_str(&palette.text.hex()),
            style.tick_font,
        )
        .unwrap();
        writeln!(s, "ax.set_gid({})", py_str(&format!("pie:{}", headers[1]))).unwrap();
    } else {
        let alpha = if headers.len() > 2 && chart_type == ChartType::Bar { 0.6 } else { 1.0 };
        for (k, header) in headers.iter().enumerate().skip(1) {
            let color = py_str(&palette.series[k - 1].hex());
            let name = py_str(header);
            let y = py_list(&table.column(k));
            let gid = py_str(chart_type.as_str());
            let call = match chart_type {
                ChartType::Bar => format!("ax.bar(x, {y}, label={name}, color={color}, alpha={alpha}, gid={gid})"),
                ChartType::Line => format!("ax.plot(x, {y}, label={name}, color={color}, linewidth={:.2}, linestyle={ls}, gid={gid})", style.line_width),
                ChartType::Scatter => format!("ax.scatter(x, {y}, label={name}, color={color}, s={:.1}, gid={gid})", (style.line_width * 3.0).powi(2)),
                _ => format!(
                    "ax.fill_between(x, {y}, label={name}, color={color}, alpha=0.4, linewidth={:.2}, linestyle={ls}, gid={gid})",
                    style.line_width
                ),
            };
            writeln!(s, "{call}").unwrap();
        }
        writeln!(s, "ax.set_xlabel({}, fontsize={}, color={})", py_str(&headers[0]), style.axis_font, py_str(&palette.text.hex())).unwrap();
        if headers.len() == 2 {
            writeln!(s, "ax.set_ylabel({}, fontsize={}, color={})", py_str(&headers[1]), style.axis_font, py_str(&palette.text.hex())).unwrap();
        }
        writeln!(s, "ax.tick_params(labelsize={}, colors={})", style.tick_font, py_str(&palette.text.hex())).unwrap();
        if style.grid_on {
            writeln!(s, "ax.grid(True, color={}, alpha={:.3}, linestyle={ls})", py_str(&palette.grid.hex()), style.grid_alpha).unwrap();
        } else {
            writeln!(s, "ax.grid(False)").unwrap();
        }
    }
    if let Some(lines) = title {
        writeln!(s, "ax.set_title({}, fontsize={}, color={})", py_str(&lines.join("\n")), style.title_font, py_str(&palette.text.hex())).unwrap();
    }
    if style.legend_on {
        writeln!(s, "ax.legend(loc={}, fontsize={})", py_str(style.legend_position.matplotlib()), style.tick_font).unwrap();
    }
    writeln!(s, "fig.tight_layout()").unwrap();
    s
}
