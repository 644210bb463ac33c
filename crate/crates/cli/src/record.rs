//! One CSV row per (instance, algorithm, configuration).

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub seed: Option<u64>,
    pub algorithm: String,
    pub objective: Option<u64>,
    pub lower_bound: Option<f64>,
    pub gap_lb_pct: Option<f64>,
    pub gap_sched_pct: Option<f64>,
    pub nodes: usize,
    pub columns: usize,
    pub wall_ms: f64,
    pub lanes: usize,
    pub workers: usize,
    pub strategy: String,
    /// `ok`, or what stopped the run early.
    pub status: String,
    /// Wall time outside the parallelizable loops.
    pub serial_ms: f64,
}

pub fn write_records(out: impl Write, records: &[RunRecord], header: bool) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends to `path`, writing the header only when the file is new or empty.
pub fn append_records(path: &Path, records: &[RunRecord]) -> csv::Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_records(io::BufWriter::new(file), records, fresh)
}

pub fn read_records(path: &Path) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
