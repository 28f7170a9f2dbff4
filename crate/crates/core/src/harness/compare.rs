use std::fmt::Write as _;
use std::path::Path;

use super::config::ProblemKind;
use super::io::{fmt_f64, parse_training_seconds, read_text};
use super::run::{read_record, RecordSummary, TIMING_FILE};
use crate::error::{Error, Result};

/// One row of a comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub source: String,
    pub algorithm: String,
    pub parameters: String,
    pub training_seconds: f64,
    pub training_fitness: f64,
    /// NaN when the run carries no test.
    pub testing_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub problem: ProblemKind,
    /// Sorted by testing mean, best first; untested runs last.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn from_records(records: Vec<(String, RecordSummary, f64)>) -> Result<Self> {
        let problem = records
            .first()
            .map(|r| r.1.problem)
            .ok_or_else(|| Error::config("nothing to compare"))?;
        if let Some((src, r, _)) = records.iter().find(|r| r.1.problem != problem) {
            return Err(Error::config(format!(
                "cannot compare a {} run ({src}) with {} runs",
                r.problem.tag(),
                problem.tag()
            )));
        }
        let mut rows: Vec<ComparisonRow> = records
            .into_iter()
            .map(|(source, r, secs)| ComparisonRow {
                source,
                algorithm: r.algorithm.tag().to_string(),
                parameters: r.parameters,
                training_seconds: secs,
                training_fitness: r.training_fitness,
                testing_mean: r.test.map_or(f64::NAN, |t| t.stats.mean),
            })
            .collect();
        rows.sort_by(|a, b| match (a.testing_mean.is_nan(), b.testing_mean.is_nan()) {
            (false, false) => b.testing_mean.total_cmp(&a.testing_mean),
            (x, y) => x.cmp(&y),
        });
        Ok(Self { problem, rows })
    }

    /// Reads `record.toml` and `timing.csv` from each run directory.
    pub fn load(dirs: &[impl AsRef<Path>]) -> Result<Self> {
        let mut records = Vec::new();
        for d in dirs {
            let d = d.as_ref();
            let summary = read_record(d)?;
            let timing = d.join(TIMING_FILE);
            let secs = parse_training_seconds(&read_text(&timing)?, &timing.display().to_string())?;
            records.push((d.display().to_string(), summary, secs));
        }
        Self::from_records(records)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,parameters,training_seconds,training_fitness,testing_mean,source\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},{}",
                r.algorithm,
                r.parameters,
                fmt_f64(r.training_seconds),
                fmt_f64(r.training_fitness),
                fmt_f64(r.testing_mean),
                r.source
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| algorithm | parameters | training time (s) | training fitness | testing mean |\n|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {:.1} | {:.4} | {:.4} |",
                r.algorithm, r.parameters, r.training_seconds, r.training_fitness, r.testing_mean
            );
        }
        out
    }
}
