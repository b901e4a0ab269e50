//! Prompt templates for driving external models.

use crate::synth::PlotLibrary;

pub const CHART_TO_CODE_TEMPLATE: &str = include_str!("../assets/prompts/chart_to_code.txt");
pub const CHART_TO_TABLE_TEMPLATE: &str = include_str!("../assets/prompts/chart_to_table.txt");

pub fn chart_to_code_prompt(library: PlotLibrary) -> String {
    let name = match library {
        PlotLibrary::Matplotlib => "Matplotlib",
        PlotLibrary::Plotly => "Plotly",
    };
    CHART_TO_CODE_TEMPLATE.replace("{library}", name)
}

/// Headers are rendered as a Markdown header row, e.g. `| Year | Sales |`.
pub fn chart_to_table_prompt<S: AsRef<str>>(headers: &[S]) -> String {
    let row: Vec<&str> = headers.iter().map(AsRef::as_ref).collect();
    CHART_TO_TABLE_TEMPLATE.replace("{headers}", &format!("| {} |", row.join(" | ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_filled() {
        let p = chart_to_code_prompt(PlotLibrary::Plotly);
        assert!(p.contains("using Plotly"));
        assert!(!p.contains('{') || !p.contains("{library}"));
        let t = chart_to_table_prompt(&["Year", "Sales"]);
        assert!(t.contains("| Year | Sales |"));
        assert!(!t.contains("{headers}"));
    }
}
