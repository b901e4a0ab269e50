//! Canonical figure schema shared by ground truth, generated outputs and
//! the executor, plus parsing, serialization and validation.
//!
//! Documents are JSON objects with a `"data"` array of trace objects and a
//! `"layout"` object. Trace `"type"` strings name one of the 30 supported
//! chart types. A few nested shapes from the declarative plotting grammar
//! (`marker.color`, `link`/`node` for sankey, `xaxis.title.text`, ...)
//! are accepted on input; serialization always writes the flat canonical
//! keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::color::{self, ColorValue};
use crate::extract::{self, TraceShape};
use crate::scalar::Scalar;

macro_rules! chart_types {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// The closed set of supported chart kinds.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum ChartType {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl ChartType {
            pub const ALL: [ChartType; 30] = [$(ChartType::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(ChartType::$variant => $name,)*
                }
            }
        }

        impl FromStr for ChartType {
            type Err = UnknownChartType;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(ChartType::$variant),)*
                    _ => Err(UnknownChartType(s.to_string())),
                }
            }
        }
    };
}

chart_types! {
    Scatterpolar => "scatterpolar",
    Scatter3d => "scatter3d",
    Line3d => "line3d",
    Pie => "pie",
    Barpolar => "barpolar",
    Mesh3d => "mesh3d",
    Violin => "violin",
    Line => "line",
    Histogram2d => "histogram2d",
    Bar => "bar",
    Box => "box",
    Scatterternary => "scatterternary",
    Waterfall => "waterfall",
    Heatmap => "heatmap",
    Scatter => "scatter",
    Cone => "cone",
    Surface => "surface",
    Histogram => "histogram",
    Carpet => "carpet",
    Treemap => "treemap",
    Parcoords => "parcoords",
    Funnelarea => "funnelarea",
    Funnel => "funnel",
    Sankey => "sankey",
    Candlestick => "candlestick",
    Contour => "contour",
    Sunburst => "sunburst",
    Histogram2dcontour => "histogram2dcontour",
    Areachart => "areachart",
    Ohlc => "ohlc",
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown chart type {0:?}")]
pub struct UnknownChartType(pub String);

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("malformed figure document: {0}")]
    MalformedDocument(String),
    #[error("figure has no recognizable traces")]
    UnsupportedFigure,
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Array-valued trace fields recognized in documents.
pub const KNOWN_FIELDS: &[&str] = &[
    "x", "y", "z", "r", "theta", "a", "b", "c", "labels", "values", "parents", "open", "high",
    "low", "close", "source", "target", "u", "v", "w", "measure", "node_labels", "q1", "median",
    "q3", "lowerfence", "upperfence", "mean",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldValues {
    Flat(Vec<Scalar>),
    Grid(Vec<Vec<Scalar>>),
}

impl FieldValues {
    pub fn len(&self) -> usize {
        match self {
            FieldValues::Flat(v) => v.len(),
            FieldValues::Grid(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_flat(&self) -> Option<&[Scalar]> {
        match self {
            FieldValues::Flat(v) => Some(v),
            FieldValues::Grid(_) => None,
        }
    }
}

/// One parallel-coordinates axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub label: String,
    pub values: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    pub name: String,
    pub chart_type: ChartType,
    pub fields: BTreeMap<String, FieldValues>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dimensions: Vec<Dimension>,
    pub colors: Vec<ColorValue>,
    pub subplot_id: Option<String>,
}

impl TraceSpec {
    pub fn new(name: impl Into<String>, chart_type: ChartType) -> Self {
        TraceSpec {
            name: name.into(),
            chart_type,
            fields: BTreeMap::new(),
            dimensions: Vec::new(),
            colors: Vec::new(),
            subplot_id: None,
        }
    }

    pub fn with_field(mut self, field: &str, values: Vec<Scalar>) -> Self {
        self.fields.insert(field.to_string(), FieldValues::Flat(values));
        self
    }

    pub fn flat(&self, field: &str) -> Option<&[Scalar]> {
        self.fields.get(field).and_then(FieldValues::as_flat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordSpace {
    Data,
    Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub text: String,
    pub x: f64,
    pub y: f64,
    pub coord_space: CoordSpace,
}

/// Figure-fraction rectangle `(x0, x1, y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Domain {
    pub const FULL: Domain = Domain { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.x0)
            && (0.0..=1.0).contains(&self.x1)
            && (0.0..=1.0).contains(&self.y0)
            && (0.0..=1.0).contains(&self.y1)
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    pub fn iou(&self, other: &Domain) -> f64 {
        let w = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let h = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        let inter = w * h;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubplotSpec {
    pub id: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub title: Option<String>,
    pub axis_labels: BTreeMap<String, String>,
    pub legend_entries: Vec<String>,
    pub annotations: Vec<Annotation>,
    pub subplots: Vec<SubplotSpec>,
    pub background_color: Option<ColorValue>,
}

impl LayoutSpec {
    /// Declared subplots, or the single implicit full-figure panel.
    pub fn effective_subplots(&self) -> Vec<SubplotSpec> {
        if self.subplots.is_empty() {
            vec![SubplotSpec { id: String::new(), domain: Domain::FULL }]
        } else {
            self.subplots.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureSource {
    GroundTruth,
    Generated,
}

/// A trace whose `type` is outside the supported set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedTrace {
    pub index: usize,
    pub type_name: String,
}

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParseNote {
    NonFiniteNumber { trace: usize, field: String, index: usize },
    BadColor { trace: Option<usize>, text: String },
    UnknownColorscale { trace: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub traces: Vec<TraceSpec>,
    pub layout: LayoutSpec,
    pub source: FigureSource,
    #[serde(default)]
    pub rejections: Vec<RejectedTrace>,
    #[serde(default)]
    pub notes: Vec<ParseNote>,
}

impl FigureSpec {
    pub fn new(traces: Vec<TraceSpec>, layout: LayoutSpec, source: FigureSource) -> Self {
        FigureSpec { traces, layout, source, rejections: Vec::new(), notes: Vec::new() }
    }

    /// Equality of traces and layout, ignoring provenance and parse notes.
    pub fn structurally_eq(&self, other: &FigureSpec) -> bool {
        self.traces == other.traces && self.layout == other.layout
    }

    /// Chart type of the first trace, used for per-type breakdowns.
    pub fn primary_chart_type(&self) -> Option<ChartType> {
        self.traces.first().map(|t| t.chart_type)
    }

    /// All trace colors in declaration order, followed by the background.
    pub fn colors(&self) -> Vec<ColorValue> {
        self.traces
            .iter()
            .flat_map(|t| t.colors.iter().copied())
            .chain(self.layout.background_color)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Parsing

const NONFINITE_MARKER: &str = "\u{0}nonfinite";

/// Replace bare `NaN`, `Infinity` and `-Infinity` tokens (as emitted by
/// Python's json module) with a marker string so the document parses.
fn sanitize_nonfinite(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            rest = &rest[1..];
            continue;
        }
        let token = ["-Infinity", "Infinity", "NaN"].into_iter().find(|t| rest.starts_with(t));
        if let Some(t) = token {
            out.push('"');
            out.push_str("\\u0000nonfinite");
            out.push('"');
            rest = &rest[t.len()..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

struct Parser {
    notes: Vec<ParseNote>,
}

impl Parser {
    fn scalar(&mut self, v: &Value, trace: usize, field: &str, index: usize) -> Scalar {
        match v {
            Value::Number(n) => match n.as_f64() {
                Some(f) if f.is_finite() => Scalar::Num(f),
                _ => {
                    self.non_finite(trace, field, index);
                    Scalar::Null
                }
            },
            Value::String(s) if s == NONFINITE_MARKER => {
                self.non_finite(trace, field, index);
                Scalar::Null
            }
            Value::String(s) => Scalar::from_text(s),
            Value::Bool(b) => Scalar::Str(b.to_string()),
            Value::Null => Scalar::Null,
            other => Scalar::Str(other.to_string()),
        }
    }

    fn non_finite(&mut self, trace: usize, field: &str, index: usize) {
        self.notes.push(ParseNote::NonFiniteNumber { trace, field: field.to_string(), index });
    }

    fn field_values(&mut self, v: &Value, trace: usize, field: &str) -> Option<FieldValues> {
        let arr = v.as_array()?;
        if arr.iter().any(Value::is_array) {
            let mut k = 0;
            let grid = arr
                .iter()
                .map(|row| match row.as_array() {
                    Some(cells) => cells
                        .iter()
                        .map(|c| {
                            k += 1;
                            self.scalar(c, trace, field, k - 1)
                        })
                        .collect(),
                    None => {
                        k += 1;
                        vec![self.scalar(row, trace, field, k - 1)]
                    }
                })
                .collect();
            Some(FieldValues::Grid(grid))
        } else {
            Some(FieldValues::Flat(
                arr.iter().enumerate().map(|(i, c)| self.scalar(c, trace, field, i)).collect(),
            ))
        }
    }

    fn color(&mut self, v: &Value, trace: Option<usize>, out: &mut Vec<ColorValue>) {
        match v {
            Value::String(s) => match color::parse_color(s) {
                Ok(c) => out.push(c),
                Err(_) => self.notes.push(ParseNote::BadColor { trace, text: s.clone() }),
            },
            Value::Array(items) => {
                for item in items {
                    // Numeric arrays are colormap inputs, not colors.
                    if item.is_string() {
                        self.color(item, trace, out);
                    }
                }
            }
            _ => {}
        }
    }

    fn colorscale(&mut self, v: &Value, trace: usize, out: &mut Vec<ColorValue>) {
        let stops = match v {
            Value::String(name) => match color::named_colorscale(name) {
                Some(s) => s,
                None => {
                    self.notes.push(ParseNote::UnknownColorscale { trace, name: name.clone() });
                    return;
                }
            },
            Value::Array(items) => items
                .iter()
                .filter_map(|stop| {
                    let pair = stop.as_array()?;
                    let pos = pair.first()?.as_f64()?;
                    let c = color::parse_color(pair.get(1)?.as_str()?).ok()?;
                    Some((pos, c))
                })
                .collect(),
            _ => return,
        };
        out.extend(color::sample_colorscale(&stops, color::COLORSCALE_SAMPLES));
    }

    fn trace(&mut self, obj: &Map<String, Value>, index: usize, chart_type: ChartType) -> TraceSpec {
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .unwrap_or_else(|| format!("trace{index}"));
        let mut trace = TraceSpec::new(name, chart_type);
        trace.subplot_id = obj.get("subplot").and_then(Value::as_str).map(str::to_string);

        for &field in KNOWN_FIELDS {
            if let Some(values) = obj.get(field).and_then(|v| self.field_values(v, index, field)) {
                trace.fields.insert(field.to_string(), values);
            }
        }
        if let Some(link) = obj.get("link").and_then(Value::as_object) {
            for (src, dst) in [("source", "source"), ("target", "target"), ("value", "values")] {
                if let Some(values) = link.get(src).and_then(|v| self.field_values(v, index, dst)) {
                    trace.fields.insert(dst.to_string(), values);
                }
            }
        }
        if let Some(labels) = obj.get("node").and_then(|n| n.get("label")) {
            if let Some(values) = self.field_values(labels, index, "node_labels") {
                trace.fields.insert("node_labels".to_string(), values);
            }
        }
        if let Some(dims) = obj.get("dimensions").and_then(Value::as_array) {
            for (d, dim) in dims.iter().enumerate() {
                let label = dim
                    .get("label")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("d{}", d + 1));
                let field = format!("dimensions[{d}]");
                let values = match dim.get("values").and_then(|v| self.field_values(v, index, &field)) {
                    Some(FieldValues::Flat(v)) => v,
                    _ => Vec::new(),
                };
                trace.dimensions.push(Dimension { label, values });
            }
        }

        let mut colors = Vec::new();
        if let Some(c) = obj.get("colors") {
            self.color(c, Some(index), &mut colors);
        }
        if let Some(marker) = obj.get("marker").and_then(Value::as_object) {
            for key in ["color", "colors"] {
                if let Some(c) = marker.get(key) {
                    self.color(c, Some(index), &mut colors);
                }
            }
            if let Some(cs) = marker.get("colorscale") {
                self.colorscale(cs, index, &mut colors);
            }
        }
        if let Some(c) = obj.get("line").and_then(|l| l.get("color")) {
            self.color(c, Some(index), &mut colors);
        }
        if let Some(c) = obj.get("fillcolor") {
            self.color(c, Some(index), &mut colors);
        }
        if let Some(cs) = obj.get("colorscale") {
            self.colorscale(cs, index, &mut colors);
        }
        trace.colors = colors;
        trace
    }

    fn layout(&mut self, obj: &Map<String, Value>, traces: &[(TraceSpec, bool)]) -> LayoutSpec {
        let mut layout = LayoutSpec { title: obj.get("title").and_then(text_of), ..Default::default() };

        if let Some(labels) = obj.get("axis_labels").and_then(Value::as_object) {
            for (k, v) in labels {
                if let Some(t) = v.as_str() {
                    layout.axis_labels.insert(k.clone(), t.to_string());
                }
            }
        }
        for (key, value) in obj {
            if is_axis_key(key) {
                if let Some(t) = value.get("title").and_then(text_of) {
                    layout.axis_labels.insert(key.clone(), t);
                }
            } else if ["scene", "polar", "ternary"].iter().any(|p| key.starts_with(p)) {
                if let Some(inner) = value.as_object() {
                    for (axis, spec) in inner {
                        if axis.ends_with("axis") {
                            if let Some(t) = spec.get("title").and_then(text_of) {
                                layout.axis_labels.insert(format!("{key}.{axis}"), t);
                            }
                        }
                    }
                }
            }
        }

        let explicit_entries = obj.get("legend").and_then(|l| l.get("entries")).and_then(Value::as_array);
        layout.legend_entries = match explicit_entries {
            Some(entries) => entries.iter().filter_map(Value::as_str).map(str::to_string).collect(),
            None if obj.get("showlegend") == Some(&Value::Bool(false)) => Vec::new(),
            None => traces.iter().filter(|(_, shown)| *shown).map(|(t, _)| t.name.clone()).collect(),
        };

        if let Some(anns) = obj.get("annotations").and_then(Value::as_array) {
            for a in anns {
                let Some(text) = a.get("text").and_then(text_of) else { continue };
                let coord = |axis: &str| a.get(axis).and_then(Value::as_f64).unwrap_or(0.0);
                let is_paper = |k: &str| a.get(k).and_then(Value::as_str) == Some("paper");
                let coord_space = match (a.get("coord_space").and_then(Value::as_str), is_paper("xref") && is_paper("yref")) {
                    (Some("fraction"), _) | (None, true) => CoordSpace::Fraction,
                    _ => CoordSpace::Data,
                };
                layout.annotations.push(Annotation { text, x: coord("x"), y: coord("y"), coord_space });
            }
        }

        if let Some(subplots) = obj.get("subplots").and_then(Value::as_array) {
            for (i, sp) in subplots.iter().enumerate() {
                let id = sp
                    .get("id")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("s{i}"));
                let range = |axis: &str| -> (f64, f64) {
                    let r = sp.get("domain").and_then(|d| d.get(axis)).and_then(Value::as_array);
                    match r.map(|r| (r.first().and_then(Value::as_f64), r.get(1).and_then(Value::as_f64))) {
                        Some((Some(a), Some(b))) => (a, b),
                        _ => (0.0, 1.0),
                    }
                };
                let (x0, x1) = range("x");
                let (y0, y1) = range("y");
                layout.subplots.push(SubplotSpec { id, domain: Domain { x0, x1, y0, y1 } });
            }
        }

        for key in ["plot_bgcolor", "paper_bgcolor"] {
            if let Some(Value::String(s)) = obj.get(key) {
                match color::parse_color(s) {
                    Ok(c) => {
                        layout.background_color = Some(c);
                        break;
                    }
                    Err(_) => self.notes.push(ParseNote::BadColor { trace: None, text: s.clone() }),
                }
            }
        }
        layout
    }
}

fn text_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Object(o) => o.get("text").and_then(Value::as_str).map(str::to_string),
        _ => None,
    }
}

fn is_axis_key(key: &str) -> bool {
    ["xaxis", "yaxis", "zaxis"]
        .iter()
        .any(|p| key.strip_prefix(p).is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit())))
}

/// Parse a figure document.
///
/// Unknown trace types are collected in `rejections`; the remaining
/// traces are kept. A ground-truth document must keep at least one trace.
pub fn parse_figure_spec(document: &[u8], source: FigureSource) -> Result<FigureSpec, FigureError> {
    let text = std::str::from_utf8(document)
        .map_err(|e| FigureError::MalformedDocument(format!("not UTF-8: {e}")))?;
    let value: Value = serde_json::from_str(&sanitize_nonfinite(text))
        .map_err(|e| FigureError::MalformedDocument(e.to_string()))?;
    let root = value
        .as_object()
        .ok_or_else(|| FigureError::MalformedDocument("top level is not an object".into()))?;
    let data = root
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| FigureError::MalformedDocument("missing \"data\" array".into()))?;
    let empty = Map::new();
    let layout_obj = match root.get("layout") {
        Some(Value::Object(o)) => o,
        None | Some(Value::Null) => &empty,
        Some(_) => return Err(FigureError::MalformedDocument("\"layout\" is not an object".into())),
    };

    let mut parser = Parser { notes: Vec::new() };
    let mut traces = Vec::new();
    let mut rejections = Vec::new();
    for (index, item) in data.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| FigureError::MalformedDocument(format!("trace {index} is not an object")))?;
        let type_name = obj.get("type").and_then(Value::as_str).unwrap_or("");
        match type_name.parse::<ChartType>() {
            Ok(chart_type) => {
                let named = obj.get("name").and_then(Value::as_str).is_some_and(|s| !s.trim().is_empty());
                let shown = named && obj.get("showlegend") != Some(&Value::Bool(false));
                traces.push((parser.trace(obj, index, chart_type), shown));
            }
            Err(_) => rejections.push(RejectedTrace { index, type_name: type_name.to_string() }),
        }
    }
    if traces.is_empty() && source == FigureSource::GroundTruth {
        return Err(FigureError::UnsupportedFigure);
    }
    let layout = parser.layout(layout_obj, &traces);
    Ok(FigureSpec {
        traces: traces.into_iter().map(|(t, _)| t).collect(),
        layout,
        source,
        rejections,
        notes: parser.notes,
    })
}

pub fn load_figure(path: &Path, source: FigureSource) -> Result<FigureSpec, FigureError> {
    let bytes = std::fs::read(path)
        .map_err(|e| FigureError::Io { path: path.display().to_string(), source: e })?;
    parse_figure_spec(&bytes, source)
}

// ---------------------------------------------------------------------------
// Serialization

fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Num(v) => json!(v),
        Scalar::Str(t) | Scalar::Date(t) => json!(t),
        Scalar::Null => Value::Null,
    }
}

fn field_json(f: &FieldValues) -> Value {
    match f {
        FieldValues::Flat(v) => Value::Array(v.iter().map(scalar_json).collect()),
        FieldValues::Grid(g) => {
            Value::Array(g.iter().map(|row| Value::Array(row.iter().map(scalar_json).collect())).collect())
        }
    }
}

/// Serialize to the canonical document shape accepted by
/// [`parse_figure_spec`].
pub fn to_document(spec: &FigureSpec) -> Value {
    let data: Vec<Value> = spec
        .traces
        .iter()
        .map(|t| {
            let mut obj = Map::new();
            obj.insert("type".into(), json!(t.chart_type.as_str()));
            obj.insert("name".into(), json!(t.name));
            if let Some(id) = &t.subplot_id {
                obj.insert("subplot".into(), json!(id));
            }
            for (k, v) in &t.fields {
                obj.insert(k.clone(), field_json(v));
            }
            if !t.dimensions.is_empty() {
                let dims: Vec<Value> = t
                    .dimensions
                    .iter()
                    .map(|d| json!({"label": d.label, "values": d.values.iter().map(scalar_json).collect::<Vec<_>>()}))
                    .collect();
                obj.insert("dimensions".into(), Value::Array(dims));
            }
            if !t.colors.is_empty() {
                obj.insert("colors".into(), json!(t.colors.iter().map(ToString::to_string).collect::<Vec<_>>()));
            }
            Value::Object(obj)
        })
        .collect();

    let l = &spec.layout;
    let mut layout = Map::new();
    if let Some(t) = &l.title {
        layout.insert("title".into(), json!(t));
    }
    if !l.axis_labels.is_empty() {
        layout.insert("axis_labels".into(), json!(l.axis_labels));
    }
    layout.insert("legend".into(), json!({ "entries": l.legend_entries }));
    if !l.annotations.is_empty() {
        let anns: Vec<Value> = l
            .annotations
            .iter()
            .map(|a| {
                let r = match a.coord_space {
                    CoordSpace::Fraction => "paper",
                    CoordSpace::Data => "x",
                };
                let yr = match a.coord_space {
                    CoordSpace::Fraction => "paper",
                    CoordSpace::Data => "y",
                };
                json!({"text": a.text, "x": a.x, "y": a.y, "xref": r, "yref": yr})
            })
            .collect();
        layout.insert("annotations".into(), Value::Array(anns));
    }
    if !l.subplots.is_empty() {
        let sps: Vec<Value> = l
            .subplots
            .iter()
            .map(|s| json!({"id": s.id, "domain": {"x": [s.domain.x0, s.domain.x1], "y": [s.domain.y0, s.domain.y1]}}))
            .collect();
        layout.insert("subplots".into(), Value::Array(sps));
    }
    if let Some(bg) = l.background_color {
        layout.insert("plot_bgcolor".into(), json!(bg.to_string()));
    }
    json!({ "data": data, "layout": Value::Object(layout) })
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RaggedArrays { trace: usize, fields: Vec<(String, usize)> },
    MissingField { trace: usize, field: String },
    RaggedGrid { trace: usize, field: String },
    UnresolvedSubplot { trace: usize, subplot: String },
    InvalidSubplotDomain { subplot: String },
    NonFiniteNumber { trace: usize, field: String, index: usize },
    EmptyName { trace: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Report every invariant violation; never fails.
pub fn validate_figure_spec(spec: &FigureSpec) -> ValidationReport {
    let mut out = Vec::new();

    for note in &spec.notes {
        if let ParseNote::NonFiniteNumber { trace, field, index } = note {
            out.push(Violation::NonFiniteNumber { trace: *trace, field: field.clone(), index: *index });
        }
    }
    for sp in &spec.layout.subplots {
        if !sp.domain.is_valid() {
            out.push(Violation::InvalidSubplotDomain { subplot: sp.id.clone() });
        }
    }

    for (i, trace) in spec.traces.iter().enumerate() {
        if trace.name.trim().is_empty() {
            out.push(Violation::EmptyName { trace: i });
        }
        if let Some(id) = &trace.subplot_id {
            if !spec.layout.subplots.iter().any(|s| &s.id == id) {
                out.push(Violation::UnresolvedSubplot { trace: i, subplot: id.clone() });
            }
        }
        validate_arrays(i, trace, &mut out);
    }
    ValidationReport { violations: out }
}

fn check_equal_lengths(i: usize, trace: &TraceSpec, fields: &[&str], out: &mut Vec<Violation>) {
    let mut lengths = Vec::new();
    for &f in fields {
        match trace.fields.get(f) {
            Some(v) => lengths.push((f.to_string(), v.len())),
            None => out.push(Violation::MissingField { trace: i, field: f.to_string() }),
        }
    }
    if lengths.windows(2).any(|w| w[0].1 != w[1].1) {
        out.push(Violation::RaggedArrays { trace: i, fields: lengths });
    }
}

fn validate_arrays(i: usize, trace: &TraceSpec, out: &mut Vec<Violation>) {
    match extract::trace_shape(trace.chart_type) {
        TraceShape::Points(fields) => check_equal_lengths(i, trace, fields, out),
        TraceShape::Grid => match trace.fields.get("z") {
            Some(FieldValues::Grid(rows)) => {
                let cols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != cols) {
                    out.push(Violation::RaggedGrid { trace: i, field: "z".into() });
                }
                let mut lengths = vec![("z.columns".to_string(), cols)];
                if let Some(x) = trace.fields.get("x") {
                    lengths.push(("x".into(), x.len()));
                }
                let x_bad = lengths.len() > 1 && lengths[1].1 != cols;
                let y_bad = trace.fields.get("y").is_some_and(|y| y.len() != rows.len());
                if x_bad || y_bad {
                    if let Some(y) = trace.fields.get("y") {
                        lengths.push(("y".into(), y.len()));
                    }
                    lengths.push(("z.rows".into(), rows.len()));
                    out.push(Violation::RaggedArrays { trace: i, fields: lengths });
                }
            }
            Some(FieldValues::Flat(_)) => out.push(Violation::RaggedGrid { trace: i, field: "z".into() }),
            None => out.push(Violation::MissingField { trace: i, field: "z".into() }),
        },
        TraceShape::Samples => {
            if !trace.fields.contains_key("x") && !trace.fields.contains_key("y") {
                out.push(Violation::MissingField { trace: i, field: "x".into() });
            }
        }
        TraceShape::Distribution => {
            let has_raw = trace.fields.contains_key("y") || trace.fields.contains_key("x");
            let has_stats = extract::BOX_STATISTICS.iter().any(|s| trace.fields.contains_key(*s));
            if !has_raw && !has_stats {
                out.push(Violation::MissingField { trace: i, field: "y".into() });
            }
            if let (Some(x), Some(y)) = (trace.fields.get("x"), trace.fields.get("y")) {
                if x.len() != y.len() {
                    out.push(Violation::RaggedArrays {
                        trace: i,
                        fields: vec![("x".into(), x.len()), ("y".into(), y.len())],
                    });
                }
            }
        }
        TraceShape::Dimensions => {
            if trace.dimensions.is_empty() {
                out.push(Violation::MissingField { trace: i, field: "dimensions".into() });
            } else if trace.dimensions.windows(2).any(|w| w[0].values.len() != w[1].values.len()) {
                out.push(Violation::RaggedArrays {
                    trace: i,
                    fields: trace.dimensions.iter().map(|d| (d.label.clone(), d.values.len())).collect(),
                });
            }
        }
    }
}
