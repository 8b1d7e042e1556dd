use std::fs;
use std::path::Path;

use serde::Serialize;

use super::runner::RunTrace;
use crate::dataio::formats::format_significant;
use crate::error::{Error, Result};

/// Significant digits of utilities in trace files.
pub const TRACE_DIGITS: usize = 10;

/// Summary of a set of runs. Fields are declared in alphabetical order so
/// the JSON keys come out sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub averaging: String,
    pub budget_k: Option<usize>,
    pub epsilon: f64,
    pub lambda: f64,
    pub metric: String,
    pub n: usize,
    pub psi_final_mean: f64,
    pub psi_final_std: f64,
    pub psi_star: Option<f64>,
    pub regret_hat: Option<f64>,
    pub runs: usize,
    pub seed: u64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

/// The trace as CSV with header `t,psi`.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut s = String::from("t,psi\n");
    for &(t, psi) in &trace.checkpoints {
        s.push_str(&format!("{t},{}\n", format_significant(psi, TRACE_DIGITS)));
    }
    s
}

pub fn emit_trace(trace: &RunTrace, path: &Path) -> Result<()> {
    fs::write(path, trace_csv(trace)).map_err(|e| Error::io(path, e))
}

pub fn emit_report(report: &RunReport, path: &Path) -> Result<()> {
    fs::write(path, report.to_json()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confusion::{ConfusionMatrix, TaskKind};
    use std::time::Duration;

    fn report() -> RunReport {
        RunReport {
            algorithm: "omma".into(),
            averaging: "macro".into(),
            budget_k: None,
            epsilon: 1e-9,
            lambda: 0.001,
            metric: "macro-f1".into(),
            n: 100,
            psi_final_mean: 0.5,
            psi_final_std: 0.01,
            psi_star: None,
            regret_hat: None,
            runs: 5,
            seed: 7,
        }
    }

    #[test]
    fn report_keys_are_sorted() {
        let json = report().to_json();
        // Keys in the order they appear in the text.
        let keys: Vec<&str> = json
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"'))
            .map(|l| l.split('"').next().unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys.len(), 13);
        assert!(json.contains("\"psi_star\": null"));
        assert!(json.ends_with("}\n"));
        assert_eq!(json, report().to_json());
    }

    #[test]
    fn trace_format() {
        let trace = RunTrace {
            checkpoints: vec![(10, 0.5), (20, 0.123456789012345)],
            final_psi: 0.123456789012345,
            final_confusion: ConfusionMatrix::zeros(TaskKind::Multilabel(1)),
            predictions: None,
            elapsed: Duration::ZERO,
        };
        assert_eq!(trace_csv(&trace), "t,psi\n10,0.5\n20,0.123456789\n");
    }
}
