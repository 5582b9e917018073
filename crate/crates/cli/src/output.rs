//! Finding records and their renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sodd::detectors::{registry, DaspCategory, DetectorConfig, Finding};

/// One line of `scan` output. Field names are part of the stable schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FindingRecord {
    pub detector_id: String,
    pub category: String,
    pub file: String,
    pub line: Option<u32>,
    pub col: Option<u32>,
    pub excerpt: String,
    /// `complete`, or `reduced` when a hop cap from the ladder was needed.
    pub completeness: &'static str,
}

impl FindingRecord {
    pub fn new(file: &str, f: &Finding) -> Self {
        FindingRecord {
            detector_id: f.detector.clone(),
            category: f.category.to_string(),
            file: file.to_string(),
            line: f.line,
            col: f.column,
            excerpt: f.code.clone(),
            completeness: if f.complete { "complete" } else { "reduced" },
        }
    }

    pub fn sort_key(&self) -> (&str, u32, u32, &str) {
        (&self.file, self.line.unwrap_or(0), self.col.unwrap_or(0), &self.detector_id)
    }
}

/// Findings per category, every category present.
pub fn category_counts(records: &[FindingRecord]) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = DaspCategory::ALL.iter().map(|c| (c.to_string(), 0)).collect();
    for r in records {
        *counts.entry(r.category.clone()).or_default() += 1;
    }
    counts
}

pub fn text_table(records: &[FindingRecord], files: usize) -> String {
    let mut s = String::new();
    for r in records {
        let at = match (r.line, r.col) {
            (Some(l), Some(c)) => format!("{}:{l}:{c}", r.file),
            _ => r.file.clone(),
        };
        let flag = if r.completeness == "complete" { "" } else { " (reduced)" };
        let _ = writeln!(s, "{at:<40} {:<28} {}{flag}", r.detector_id, r.excerpt.replace('\n', " "));
    }
    s.push('\n');
    s.push_str(&text_summary(records, files));
    s
}

pub fn text_summary(records: &[FindingRecord], files: usize) -> String {
    let mut s = format!("{} findings in {files} files\n", records.len());
    for (cat, n) in category_counts(records) {
        let _ = writeln!(s, "  {cat:<28}{n:>6}");
    }
    s
}

/// A SARIF 2.1.0 log with one rule per registered detector.
pub fn sarif(records: &[FindingRecord]) -> Value {
    let rules: Vec<Value> = registry(&DetectorConfig::default())
        .iter()
        .map(|d| {
            json!({
                "id": d.id,
                "shortDescription": { "text": d.description },
                "properties": { "category": d.category.to_string() },
            })
        })
        .collect();
    let results: Vec<Value> = records
        .iter()
        .map(|r| {
            let mut region = serde_json::Map::new();
            if let Some(l) = r.line {
                region.insert("startLine".into(), l.into());
            }
            if let Some(c) = r.col {
                region.insert("startColumn".into(), c.into());
            }
            region.insert("snippet".into(), json!({ "text": r.excerpt }));
            json!({
                "ruleId": r.detector_id,
                "level": "warning",
                "message": { "text": format!("{}: {}", r.category, r.excerpt) },
                "locations": [{
                    "physicalLocation": {
                        "artifactLocation": { "uri": r.file },
                        "region": region,
                    }
                }],
                "properties": { "completeness": r.completeness },
            })
        })
        .collect();
    json!({
        "version": "2.1.0",
        "$schema": "https://json.schemastore.org/sarif-2.1.0.json",
        "runs": [{
            "tool": { "driver": { "name": "sodd", "version": env!("CARGO_PKG_VERSION"), "rules": rules } },
            "results": results,
        }],
    })
}
