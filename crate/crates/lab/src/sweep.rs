//! Independent scenarios run side by side, summarized in one table.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{category, LabError, LabResult, EXIT_OK};
use crate::io::{write_json, write_table};
use crate::run::run_scenario;
use crate::scenario::ScenarioDoc;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_REPORT_FILE: &str = "sweep.json";

/// `defaults` is merged under every entry of `scenarios`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepDoc {
    pub defaults: ScenarioDoc,
    pub scenarios: Vec<ScenarioDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub kind: String,
    pub exit_code: i32,
    pub status: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub exit_code: i32,
    pub rows: Vec<Row>,
}

fn entry_name(doc: &ScenarioDoc, index: usize) -> String {
    doc.name.clone().or_else(|| doc.kind.map(|k| k.name().to_string())).unwrap_or_else(|| format!("scenario-{index}"))
}

/// Runs every scenario into `out/<name>/` and writes `summary.csv` and
/// `sweep.json` into `out`. Rows are ordered by name; the exit code is the
/// worst over the rows.
pub fn sweep(doc: &SweepDoc, out: &Path) -> LabResult<SweepReport> {
    let docs: Vec<ScenarioDoc> = doc
        .scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut d = doc.defaults.clone();
            d.merge(s);
            d.name = Some(entry_name(&d, i));
            d.out = Some(out.join(d.name.as_deref().unwrap_or_default()));
            d
        })
        .collect();
    let mut seen = BTreeSet::new();
    for d in &docs {
        let name = d.name.as_deref().unwrap_or_default();
        if !seen.insert(name) {
            return Err(LabError::Invalid(format!("duplicate scenario name {name:?}")));
        }
    }
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let mut rows: Vec<Row> = docs
        .par_iter()
        .map(|d| {
            let name = d.name.clone().unwrap_or_default();
            let kind = d.kind.map(|k| k.name().to_string()).unwrap_or_default();
            let (exit_code, message) = match d.resolve().and_then(|s| run_scenario(&s)) {
                Ok(r) => (r.exit_code, r.message.unwrap_or_default()),
                Err(e) => (e.exit_code(), e.to_string()),
            };
            Row { name, kind, exit_code, status: category(exit_code), message }
        })
        .collect();
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    let exit_code = rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.name.clone(), r.kind.clone(), r.exit_code.to_string(), r.status.to_string(), r.message.clone()])
        .collect();
    write_table(&out.join(SUMMARY_FILE), &["name", "kind", "exit_code", "status", "message"], &table)?;
    let report = SweepReport { exit_code, rows };
    write_json(&out.join(SWEEP_REPORT_FILE), &report)?;
    Ok(report)
}
