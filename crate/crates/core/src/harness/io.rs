use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizers::RunHistory;
use crate::problems::{DriftSeries, RobustnessReport};

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::config(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub const HISTORY_HEADER: &str = "generation,best_fitness,mean_fitness,evaluations,\
strategy_rand1,strategy_rand_to_best2,strategy_rand2,strategy_current_to_rand1";

/// Per-generation log. Wall-clock time is kept out so the file is reproducible;
/// see [`timing_csv`].
pub fn history_csv(history: &RunHistory) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in &history.records {
        let c = r.strategy_counts;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.generation,
            fmt_f64(r.best_fitness),
            fmt_f64(r.mean_fitness),
            r.evaluations,
            c[0],
            c[1],
            c[2],
            c[3]
        );
    }
    out
}

pub fn timing_csv(history: &RunHistory) -> String {
    let mut out = String::from("generation,elapsed_seconds\n");
    for r in &history.records {
        let _ = writeln!(out, "{},{}", r.generation, fmt_f64(r.elapsed_seconds));
    }
    out
}

/// Elapsed seconds of the last generation in a timing file.
pub fn parse_training_seconds(text: &str, origin: &str) -> Result<f64> {
    let last = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .last()
        .ok_or_else(|| parse_error(origin, 1, "timing file has no rows"))?;
    last.split(',')
        .nth(1)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| parse_error(origin, text.lines().count(), "malformed timing row"))
}

/// One value per line, tagged with its control channel and time step. The
/// genome is channel-major: value `c * steps + s` drives channel `c` in step `s`.
pub fn genome_csv(genome: &[f64], channels: usize) -> Result<String> {
    if channels == 0 || !genome.len().is_multiple_of(channels) {
        return Err(Error::dim(format!(
            "genome of length {} does not split into {channels} channels",
            genome.len()
        )));
    }
    let steps = genome.len() / channels;
    let mut out = String::from("channel,step,value\n");
    for (i, v) in genome.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i / steps, i % steps, fmt_f64(*v));
    }
    Ok(out)
}

pub fn parse_genome_csv(text: &str, origin: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "channel,step,value" => {}
        _ => return Err(parse_error(origin, 1, "expected header `channel,step,value`")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [c, s, v] => c
                .parse::<usize>()
                .ok()
                .zip(s.parse::<usize>().ok())
                .zip(v.parse::<f64>().ok()),
            _ => None,
        };
        let ((c, s), v) = parsed.ok_or_else(|| parse_error(origin, i + 1, "expected `channel,step,value`"))?;
        rows.push((c, s, v));
    }
    rows.sort_by_key(|&(c, s, _)| (c, s));
    let steps = rows.iter().filter(|r| r.0 == 0).count();
    let consistent = rows
        .iter()
        .enumerate()
        .all(|(i, &(c, s, _))| steps > 0 && c == i / steps && s == i % steps);
    if !consistent {
        return Err(parse_error(origin, 0, "channel/step pairs do not form a full grid"));
    }
    Ok(rows.into_iter().map(|r| r.2).collect())
}

pub fn report_csv(report: &RobustnessReport) -> String {
    let k = report.thetas.first().map_or(0, Vec::len);
    let mut out = String::from("sample");
    for j in 0..k {
        let _ = write!(out, ",theta{j}");
    }
    out.push_str(",fitness\n");
    for (i, (theta, v)) in report.thetas.iter().zip(&report.values).enumerate() {
        let _ = write!(out, "{i}");
        for t in theta {
            let _ = write!(out, ",{}", fmt_f64(*t));
        }
        let _ = writeln!(out, ",{}", fmt_f64(*v));
    }
    out
}

pub fn drift_csv(series: &DriftSeries) -> String {
    let mut out = String::from("t,d1_target,d2_target,d3_target,d12,d13,d23\n");
    for i in 0..series.len() {
        let row = [
            series.times[i],
            series.to_target[0][i],
            series.to_target[1][i],
            series.to_target[2][i],
            series.pairwise[0][i],
            series.pairwise[1][i],
            series.pairwise[2][i],
        ];
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn parse_error(origin: &str, line: usize, message: &str) -> Error {
    Error::Parse {
        path: origin.to_string(),
        message: if line > 0 {
            format!("line {line}: {message}")
        } else {
            message.to_string()
        },
    }
}
