//! Visual structure consistency: text components, color fidelity, chart
//! type distribution and subplot layout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::color;
use crate::figure::{Annotation, CoordSpace, FigureSpec};
use crate::matching::edit_distance;

/// Default radius (figure fraction) at which annotation placement stops
/// earning credit.
pub const DEFAULT_ANNOTATION_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureConfig {
    pub annotation_radius: f64,
}

impl Default for StructureConfig {
    fn default() -> Self {
        StructureConfig { annotation_radius: DEFAULT_ANNOTATION_RADIUS }
    }
}

/// Per-category text agreement. A category is `None` when the reference
/// has no elements of that kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextScores {
    pub legend: Option<f64>,
    pub title: Option<f64>,
    pub axis_label: Option<f64>,
    pub annotations: Option<f64>,
    pub avg: f64,
}

impl TextScores {
    pub fn from_categories(
        legend: Option<f64>,
        title: Option<f64>,
        axis_label: Option<f64>,
        annotations: Option<f64>,
    ) -> Self {
        let present: Vec<f64> = [legend, title, axis_label, annotations].into_iter().flatten().collect();
        // With nothing to compare there is nothing to get wrong.
        let avg = if present.is_empty() { 1.0 } else { present.iter().sum::<f64>() / present.len() as f64 };
        TextScores { legend, title, axis_label, annotations, avg }
    }

    /// All present categories zeroed, for failed samples.
    pub fn zeroed_like(reference: &FigureSpec) -> Self {
        let l = &reference.layout;
        let z = |present: bool| present.then_some(0.0);
        TextScores {
            legend: z(!l.legend_entries.is_empty()),
            title: z(l.title.is_some()),
            axis_label: z(!l.axis_labels.is_empty()),
            annotations: z(!l.annotations.is_empty()),
            avg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureScores {
    pub text: TextScores,
    pub color: f64,
    pub chart_type: f64,
    pub layout: f64,
}

/// `1 - J(a, b) / max(|a|, |b|)`, with two empty strings scoring 1.
pub fn string_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(a, b) as f64 / longest as f64
}

/// Maximum-weight one-to-one matching score:
/// `sum(matched similarity) / max(|gen|, |ref|)`.
fn matched_similarity(gen_len: usize, ref_len: usize, sim: impl Fn(usize, usize) -> f64) -> f64 {
    let denom = gen_len.max(ref_len);
    if denom == 0 {
        return 1.0;
    }
    let cost: Vec<Vec<f64>> = (0..gen_len).map(|i| (0..ref_len).map(|j| 1.0 - sim(i, j)).collect()).collect();
    let matched: f64 = assignment::solve(&cost).pairs.iter().map(|&(i, j)| sim(i, j)).sum();
    (matched / denom as f64).clamp(0.0, 1.0)
}

fn string_set_score(gen: &[&str], reference: &[&str]) -> Option<f64> {
    if reference.is_empty() {
        return None;
    }
    let gen: Vec<String> = gen.iter().map(|s| s.trim().to_string()).collect();
    let reference: Vec<String> = reference.iter().map(|s| s.trim().to_string()).collect();
    Some(matched_similarity(gen.len(), reference.len(), |i, j| string_similarity(&gen[i], &reference[j])))
}

/// Position agreement factor `1 - min(1, dist / radius)`.
///
/// Figure-fraction pairs use Euclidean distance. When either side is in
/// data coordinates, each axis offset is scaled by the reference
/// magnitude (at least 1) before taking the Euclidean norm.
fn positional_factor(g: &Annotation, r: &Annotation, radius: f64) -> f64 {
    let dist = if g.coord_space == CoordSpace::Fraction && r.coord_space == CoordSpace::Fraction {
        (g.x - r.x).hypot(g.y - r.y)
    } else {
        let dx = (g.x - r.x) / r.x.abs().max(1.0);
        let dy = (g.y - r.y) / r.y.abs().max(1.0);
        dx.hypot(dy)
    };
    if radius <= 0.0 {
        return if dist == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - (dist / radius).min(1.0)
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

pub fn text_components_score(gen: &FigureSpec, reference: &FigureSpec, cfg: &StructureConfig) -> TextScores {
    let (gl, rl) = (&gen.layout, &reference.layout);

    let legend = string_set_score(&strs(&gl.legend_entries), &strs(&rl.legend_entries));
    let title = string_set_score(
        &gl.title.as_deref().into_iter().collect::<Vec<_>>(),
        &rl.title.as_deref().into_iter().collect::<Vec<_>>(),
    );
    let axis_label = string_set_score(
        &gl.axis_labels.values().map(String::as_str).collect::<Vec<_>>(),
        &rl.axis_labels.values().map(String::as_str).collect::<Vec<_>>(),
    );
    let annotations = (!rl.annotations.is_empty()).then(|| {
        let (ga, ra) = (&gl.annotations, &rl.annotations);
        matched_similarity(ga.len(), ra.len(), |i, j| {
            string_similarity(ga[i].text.trim(), ra[j].text.trim())
                * positional_factor(&ga[i], &ra[j], cfg.annotation_radius)
        })
    });
    TextScores::from_categories(legend, title, axis_label, annotations)
}

/// Color fidelity over all trace colors plus the background.
pub fn color_score(gen: &FigureSpec, reference: &FigureSpec) -> f64 {
    color::color_set_fidelity(&gen.colors(), &reference.colors())
}

/// Generalized Jaccard over per-type trace counts.
pub fn chart_type_score(gen: &FigureSpec, reference: &FigureSpec) -> f64 {
    let mut counts: BTreeMap<_, (usize, usize)> = BTreeMap::new();
    for t in &gen.traces {
        counts.entry(t.chart_type).or_default().0 += 1;
    }
    for t in &reference.traces {
        counts.entry(t.chart_type).or_default().1 += 1;
    }
    let (num, den) = counts
        .values()
        .fold((0usize, 0usize), |(n, d), &(g, r)| (n + g.min(r), d + g.max(r)));
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `0.5 * count_term + 0.5 * geometry_term` over subplots paired by
/// minimum total center distance.
pub fn layout_score(gen: &FigureSpec, reference: &FigureSpec) -> f64 {
    let gs = gen.layout.effective_subplots();
    let rs = reference.layout.effective_subplots();
    let (kg, kr) = (gs.len(), rs.len());
    let count_term = kg.min(kr) as f64 / kg.max(kr) as f64;
    let pairs = subplot_pairing(&gs.iter().map(|s| s.domain).collect::<Vec<_>>(), &rs.iter().map(|s| s.domain).collect::<Vec<_>>());
    let geometry_term = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().map(|&(i, j)| gs[i].domain.iou(&rs[j].domain)).sum::<f64>() / pairs.len() as f64
    };
    0.5 * count_term + 0.5 * geometry_term
}

/// Pair subplot domains minimizing summed center distance.
pub fn subplot_pairing(gen: &[crate::figure::Domain], reference: &[crate::figure::Domain]) -> Vec<(usize, usize)> {
    let cost: Vec<Vec<f64>> = gen
        .iter()
        .map(|g| {
            let (gx, gy) = g.center();
            reference
                .iter()
                .map(|r| {
                    let (rx, ry) = r.center();
                    (gx - rx).hypot(gy - ry)
                })
                .collect()
        })
        .collect();
    assignment::solve(&cost).pairs
}

pub fn structure_scores(gen: &FigureSpec, reference: &FigureSpec, cfg: &StructureConfig) -> StructureScores {
    StructureScores {
        text: text_components_score(gen, reference, cfg),
        color: color_score(gen, reference),
        chart_type: chart_type_score(gen, reference),
        layout: layout_score(gen, reference),
    }
}
