#![allow(dead_code)]

use std::path::{Path, PathBuf};

/// Example 9 gold table.
pub const GOLD_CSV: &str = "Year,RDS 18_49,RDS Total,TSN 18_49,TSN Total\n\
2014,58000,191000,209000,660000\n\
2015,63000,201000,157000,535000\n\
2016,41000,142000,170000,553000\n";

pub const PERFECT_OUTPUT: &str = "| Year | RDS 18_49 | RDS Total | TSN 18_49 | TSN Total |\n\
|---|---|---|---|---|\n\
| 2014 | 58,000 | 191,000 | 209,000 | 660,000 |\n\
| 2015 | 63,000 | 201,000 | 157,000 | 535,000 |\n\
| 2016 | 41,000 | 142,000 | 170,000 | 553,000 |\n";

/// The same table as CSV with rows reordered and one header misspelled.
pub const REORDERED_OUTPUT: &str = "Year,RDS 18_49,RDS Totl,TSN 18_49,TSN Total\n\
2016,41000,142000,170000,553000\n\
2014,58000,191000,209000,660000\n\
2015,63000,201000,157000,535000\n";

pub fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/figures").join(name)
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// A table-task corpus: `outputs` are the model texts, one sample each.
pub fn table_corpus(dir: &Path, outputs: &[&str]) -> PathBuf {
    write(dir, "gold.csv", GOLD_CSV);
    let mut manifest = String::new();
    for (i, text) in outputs.iter().enumerate() {
        write(dir, &format!("out{i}.txt"), text);
        manifest.push_str(&format!(
            "{{\"id\":\"s{i}\",\"gt_table\":\"gold.csv\",\"gt_figure\":\"{}\",\"candidate\":\"out{i}.txt\"}}\n",
            core_fixture("line.figure.json").display()
        ));
    }
    write(dir, "manifest.jsonl", &manifest)
}

pub fn read_report(out: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(name)).unwrap()).unwrap()
}
