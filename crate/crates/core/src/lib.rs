//! Chart grounding evaluation: figure parsing, color and structure
//! metrics, tuple-level data fidelity, table reconstruction scoring,
//! dataset filtering and synthetic script generation.

pub mod assignment;
pub mod color;
pub mod extract;
pub mod figure;
pub mod matching;
pub mod prompts;
pub mod qa;
pub mod report;
pub mod scalar;
pub mod structure;
pub mod synth;
pub mod table;

pub use color::{color_set_fidelity, delta_e_2000, parse_color, ColorValue, LabColor};
pub use extract::{extract_tuples, DataTuple, TupleSet};
pub use figure::{load_figure, parse_figure_spec, validate_figure_spec, ChartType, FigureSource, FigureSpec};
pub use matching::{fidelity_metrics, match_tuple_sets, match_tuples, FidelityMetrics, LevelMetrics, ToleranceLevel};
pub use report::{aggregate, score_sample, BenchmarkReport, SampleBundle, SampleReport, Weights};
pub use scalar::Scalar;
pub use structure::{structure_scores, StructureConfig, StructureScores};
pub use table::{evaluate_table, parse_model_table, HeaderSet, Table};
