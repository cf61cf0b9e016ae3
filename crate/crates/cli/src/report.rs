//! Collects the per-suite verdicts found in an output directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::output::Verdict;
use crate::suites::Suite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub suite: String,
    /// `pass`, `fail`, `missing` or `unreadable`.
    pub status: String,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub failed_suites: usize,
    pub suites: Vec<SuiteEntry>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summaries are plain data");
        s.push('\n');
        s
    }
}

/// One entry per known suite; a suite without a readable passing verdict
/// counts as failed.
pub fn summarize(out_dir: &Path) -> Summary {
    let suites: Vec<SuiteEntry> = Suite::ALL
        .iter()
        .map(|s| {
            let path = out_dir.join(format!("{}.json", s.name()));
            let (status, verdict) = match std::fs::read_to_string(&path) {
                Err(_) => ("missing", None),
                Ok(text) => match serde_json::from_str::<Verdict>(&text) {
                    Ok(v) if v.suite == s.name() => (if v.pass { "pass" } else { "fail" }, Some(v)),
                    _ => ("unreadable", None),
                },
            };
            SuiteEntry {
                suite: s.name().to_string(),
                status: status.to_string(),
                verdict,
            }
        })
        .collect();
    let failed_suites = suites.iter().filter(|e| e.status != "pass").count();
    Summary { failed_suites, suites }
}
