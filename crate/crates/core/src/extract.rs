//! Type-specific extractors turning figure traces into normalized data
//! tuples `(name, field_1, ..., field_k)`.

use serde::{Deserialize, Serialize};

use crate::figure::{ChartType, FieldValues, FigureSpec, TraceSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    String,
    Numeric,
}

/// Ordered tuple layout for one chart type. Position 0 is always the
/// trace name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSchema {
    pub chart_type: ChartType,
    pub field_names: Vec<String>,
    pub field_kinds: Vec<FieldKind>,
    /// Parallel coordinates append one numeric field per dimension.
    pub variadic: bool,
}

impl FieldSchema {
    pub fn arity(&self) -> usize {
        self.field_names.len()
    }
}

/// A normalized per-point record; `values[0]` is the trace name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTuple {
    pub values: Vec<Scalar>,
}

impl DataTuple {
    pub fn new(values: Vec<Scalar>) -> Self {
        DataTuple { values }
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }
}

/// Tuples extracted from one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleSet {
    pub chart_type: Option<ChartType>,
    pub tuples: Vec<DataTuple>,
}

impl TupleSet {
    pub fn new(chart_type: Option<ChartType>, tuples: Vec<DataTuple>) -> Self {
        TupleSet { chart_type, tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// How a trace stores its points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceShape {
    /// Parallel flat arrays, one per listed document field.
    Points(&'static [&'static str]),
    /// A 2D `z` grid with optional `x`/`y` coordinate arrays.
    Grid,
    /// Raw samples in `x` (or `y`).
    Samples,
    /// Box/violin: raw samples or precomputed statistics.
    Distribution,
    Dimensions,
}

/// Precomputed box statistics, in emission order.
pub const BOX_STATISTICS: &[&str] = &["q1", "median", "q3", "lowerfence", "upperfence", "mean"];

pub fn trace_shape(t: ChartType) -> TraceShape {
    use ChartType::*;
    match t {
        Scatter | Line | Areachart | Bar | Funnel | Waterfall => TraceShape::Points(&["x", "y"]),
        Candlestick | Ohlc => TraceShape::Points(&["x", "low", "high", "open", "close"]),
        Pie | Funnelarea => TraceShape::Points(&["labels", "values"]),
        Sunburst | Treemap => TraceShape::Points(&["labels", "parents", "values"]),
        Heatmap | Contour | Histogram2d | Histogram2dcontour | Surface => TraceShape::Grid,
        Scatter3d | Line3d | Mesh3d => TraceShape::Points(&["x", "y", "z"]),
        Cone => TraceShape::Points(&["x", "y", "z", "u", "v", "w"]),
        Scatterpolar | Barpolar => TraceShape::Points(&["theta", "r"]),
        Scatterternary => TraceShape::Points(&["a", "b", "c"]),
        Histogram => TraceShape::Samples,
        Box | Violin => TraceShape::Distribution,
        Sankey => TraceShape::Points(&["source", "target", "values"]),
        Parcoords => TraceShape::Dimensions,
        Carpet => TraceShape::Points(&["a", "b"]),
    }
}

/// The fixed tuple layout for a chart type.
pub fn tuple_schema(t: ChartType) -> FieldSchema {
    use ChartType::*;
    use FieldKind::{Numeric as N, String as S};
    let fields: &[(&str, FieldKind)] = match t {
        Scatter | Line | Areachart | Bar | Funnel | Waterfall | Box | Violin => &[("x", S), ("y", N)],
        Candlestick | Ohlc => &[("x", S), ("low", N), ("high", N), ("open", N), ("close", N)],
        Pie | Funnelarea => &[("label", S), ("value", N)],
        Sunburst | Treemap => &[("label", S), ("parent", S), ("value", N)],
        Heatmap | Contour | Histogram2d | Histogram2dcontour | Surface => &[("x", S), ("y", S), ("z", N)],
        Scatter3d | Line3d | Mesh3d => &[("x", N), ("y", N), ("z", N)],
        Cone => &[("x", N), ("y", N), ("z", N), ("u", N), ("v", N), ("w", N)],
        Scatterpolar | Barpolar => &[("theta", S), ("r", N)],
        Scatterternary => &[("a", N), ("b", N), ("c", N)],
        Histogram => &[("x", N)],
        Sankey => &[("source", S), ("target", S), ("value", N)],
        Parcoords => &[],
        Carpet => &[("a", N), ("b", N)],
    };
    let mut field_names = vec!["name".to_string()];
    let mut field_kinds = vec![FieldKind::String];
    for (n, k) in fields {
        field_names.push((*n).to_string());
        field_kinds.push(*k);
    }
    FieldSchema { chart_type: t, field_names, field_kinds, variadic: t == Parcoords }
}

/// Schema for a concrete trace (expands parallel-coordinate dimensions).
pub fn schema_for_trace(trace: &TraceSpec) -> FieldSchema {
    let mut schema = tuple_schema(trace.chart_type);
    if schema.variadic {
        for k in 1..=trace.dimensions.len() {
            schema.field_names.push(format!("d{k}"));
            schema.field_kinds.push(FieldKind::Numeric);
        }
    }
    schema
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractDiagnostic {
    SchemaFieldMissing { trace: usize, field: String },
    /// Points with a null in some schema field, left out of the set.
    DroppedNullPoints { trace: usize, count: usize },
    /// Arrays of unequal length; extra points beyond the shortest are ignored.
    LengthMismatch { trace: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub sets: Vec<TupleSet>,
    pub diagnostics: Vec<ExtractDiagnostic>,
}

impl Extraction {
    /// Union of all per-trace tuples.
    pub fn pooled(&self) -> Vec<DataTuple> {
        self.sets.iter().flat_map(|s| s.tuples.iter().cloned()).collect()
    }
}

/// Run the type-specific extractor for every trace.
pub fn extract_tuples(spec: &FigureSpec) -> Extraction {
    let mut out = Extraction::default();
    for (i, trace) in spec.traces.iter().enumerate() {
        let set = extract_trace(i, trace, &mut out.diagnostics);
        out.sets.push(set);
    }
    out
}

struct Rows {
    rows: Vec<Vec<Scalar>>,
}

impl Rows {
    fn push(&mut self, row: Vec<Scalar>) {
        self.rows.push(row);
    }
}

fn extract_trace(i: usize, trace: &TraceSpec, diags: &mut Vec<ExtractDiagnostic>) -> TupleSet {
    let name = Scalar::Str(trace.name.clone());
    let mut rows = Rows { rows: Vec::new() };
    let missing = |field: &str, diags: &mut Vec<ExtractDiagnostic>| {
        diags.push(ExtractDiagnostic::SchemaFieldMissing { trace: i, field: field.to_string() });
        TupleSet::new(Some(trace.chart_type), Vec::new())
    };

    match trace_shape(trace.chart_type) {
        TraceShape::Points(fields) => {
            let mut columns: Vec<Vec<Scalar>> = Vec::with_capacity(fields.len());
            for &f in fields {
                match trace.flat(f) {
                    Some(v) => columns.push(v.to_vec()),
                    None => return missing(f, diags),
                }
            }
            if trace.chart_type == ChartType::Sankey {
                if let Some(labels) = trace.flat("node_labels") {
                    for col in &mut columns[..2] {
                        for cell in col.iter_mut() {
                            *cell = dereference_node(cell, labels);
                        }
                    }
                }
            }
            zip_columns(i, &name, &columns, &mut rows, diags);
        }
        TraceShape::Grid => {
            let Some(FieldValues::Grid(z)) = trace.fields.get("z") else {
                return missing("z", diags);
            };
            let xs = trace.flat("x");
            let ys = trace.flat("y");
            for (r, row) in z.iter().enumerate() {
                for (c, cell) in row.iter().enumerate() {
                    let x = coordinate(xs, c);
                    let y = coordinate(ys, r);
                    rows.push(vec![name.clone(), x, y, cell.clone()]);
                }
            }
        }
        TraceShape::Samples => {
            let Some(samples) = trace.flat("x").or_else(|| trace.flat("y")) else {
                return missing("x", diags);
            };
            for s in samples {
                rows.push(vec![name.clone(), s.clone()]);
            }
        }
        TraceShape::Distribution => {
            let raw_y = trace.flat("y");
            let raw_x = trace.flat("x");
            match (raw_x, raw_y) {
                (Some(x), Some(y)) => zip_columns(i, &name, &[x.to_vec(), y.to_vec()], &mut rows, diags),
                (None, Some(samples)) | (Some(samples), None) => {
                    for s in samples {
                        rows.push(vec![name.clone(), Scalar::Str(String::new()), s.clone()]);
                    }
                }
                (None, None) => {
                    let mut any = false;
                    for &stat in BOX_STATISTICS {
                        if let Some(values) = trace.flat(stat) {
                            any = true;
                            for v in values {
                                rows.push(vec![name.clone(), Scalar::str(stat), v.clone()]);
                            }
                        }
                    }
                    if !any {
                        return missing("y", diags);
                    }
                }
            }
        }
        TraceShape::Dimensions => {
            if trace.dimensions.is_empty() {
                return missing("dimensions", diags);
            }
            let columns: Vec<Vec<Scalar>> = trace.dimensions.iter().map(|d| d.values.clone()).collect();
            zip_columns(i, &name, &columns, &mut rows, diags);
        }
    }

    let before = rows.rows.len();
    let tuples: Vec<DataTuple> = rows
        .rows
        .into_iter()
        .filter(|r| !r.iter().any(Scalar::is_null))
        .map(DataTuple::new)
        .collect();
    let dropped = before - tuples.len();
    if dropped > 0 {
        diags.push(ExtractDiagnostic::DroppedNullPoints { trace: i, count: dropped });
    }
    TupleSet::new(Some(trace.chart_type), tuples)
}

fn zip_columns(
    i: usize,
    name: &Scalar,
    columns: &[Vec<Scalar>],
    rows: &mut Rows,
    diags: &mut Vec<ExtractDiagnostic>,
) {
    let n = columns.iter().map(Vec::len).min().unwrap_or(0);
    if columns.iter().any(|c| c.len() != n) {
        diags.push(ExtractDiagnostic::LengthMismatch { trace: i });
    }
    for k in 0..n {
        let mut row = Vec::with_capacity(columns.len() + 1);
        row.push(name.clone());
        row.extend(columns.iter().map(|c| c[k].clone()));
        rows.push(row);
    }
}

fn coordinate(axis: Option<&[Scalar]>, index: usize) -> Scalar {
    match axis {
        Some(values) => values.get(index).cloned().unwrap_or(Scalar::Null),
        None => Scalar::Num(index as f64),
    }
}

fn dereference_node(cell: &Scalar, labels: &[Scalar]) -> Scalar {
    match cell {
        Scalar::Num(v) if v.fract() == 0.0 && *v >= 0.0 => {
            labels.get(*v as usize).cloned().unwrap_or_else(|| cell.clone())
        }
        _ => cell.clone(),
    }
}
