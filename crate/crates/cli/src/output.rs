use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use devlab_core::montecarlo::{Estimate, EstimateReport};
use serde::Serialize;

use crate::error::{io, CliError, CliResult};

pub const REPORT_FILE: &str = "report.jsonl";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const BOUNDS_FILE: &str = "bounds.jsonl";
pub const THRESHOLDS_FILE: &str = "thresholds.json";
pub const CALIBRATION_FILE: &str = "calibration.json";

/// Columns of `aggregate.csv`, in order. Players are A (index 0) and B (index 1).
pub const AGGREGATE_HEADER: [&str; 30] = [
    "name",
    "goal",
    "blame",
    "deviations",
    "horizon",
    "seed",
    "confidence",
    "conditioned",
    "attempts",
    "trials",
    "reached",
    "missed",
    "blamed_a",
    "blamed_b",
    "p_miss",
    "p_miss_lo",
    "p_miss_hi",
    "p_miss_blame_a",
    "p_miss_blame_a_lo",
    "p_miss_blame_a_hi",
    "p_miss_blame_b",
    "p_miss_blame_b_lo",
    "p_miss_blame_b_hi",
    "p_blame_a_given_miss",
    "p_blame_a_given_miss_lo",
    "p_blame_a_given_miss_hi",
    "p_blame_b_given_miss",
    "p_blame_b_given_miss_lo",
    "p_blame_b_given_miss_hi",
    "decided_at_step",
];

pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io(format!("cannot create {}", dir.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io(format!("cannot create {}", path.display())))
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = create(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, row)
            .map_err(|e| CliError::Io { context: path.display().to_string(), source: e.into() })?;
        w.write_all(b"\n").map_err(io(path.display().to_string()))?;
    }
    w.flush().map_err(io(path.display().to_string()))
}

pub fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Io { context: path.display().to_string(), source: e.into() })?;
    w.write_all(b"\n").map_err(io(path.display().to_string()))?;
    w.flush().map_err(io(path.display().to_string()))
}

fn estimate_cells(e: Option<&Estimate>) -> [String; 3] {
    match e {
        Some(e) => [e.value.to_string(), e.lo.to_string(), e.hi.to_string()],
        None => Default::default(),
    }
}

fn aggregate_row(r: &EstimateReport) -> Vec<String> {
    let count = |i: usize| r.counts.blamed.get(i).map(u64::to_string).unwrap_or_default();
    let given = |i: usize| estimate_cells(r.blamed_given_miss.as_ref().and_then(|v| v.get(i)));
    let mut row = vec![
        r.name.clone().unwrap_or_default(),
        r.goal.clone(),
        r.blame.clone(),
        serde_json::to_string(&r.deviations).expect("deviation specs serialize"),
        r.horizon.to_string(),
        r.seed.to_string(),
        r.confidence.to_string(),
        r.conditioned.to_string(),
        r.attempts.to_string(),
        r.trials.to_string(),
        r.counts.reached.to_string(),
        r.counts.missed.to_string(),
        count(0),
        count(1),
    ];
    row.extend(estimate_cells(Some(&r.p_miss)));
    row.extend(estimate_cells(r.p_miss_and_blamed.first()));
    row.extend(estimate_cells(r.p_miss_and_blamed.get(1)));
    row.extend(given(0));
    row.extend(given(1));
    row.push(r.decided_at_step.map(|s| s.map(|c| c.to_string()).join(" ")).unwrap_or_default());
    row
}

pub fn write_aggregate(path: &Path, reports: &[EstimateReport]) -> CliResult<()> {
    let err = |e: csv::Error| CliError::Io { context: path.display().to_string(), source: e.into() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(AGGREGATE_HEADER).map_err(err)?;
    for r in reports {
        w.write_record(aggregate_row(r)).map_err(err)?;
    }
    w.flush().map_err(io(path.display().to_string()))
}

pub fn out_path(dir: &Path, file: &str) -> PathBuf {
    dir.join(file)
}
