//! Aggregation of run records into per-size tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use bnpsched::{amdahl, amdahl_limit};
use serde::Serialize;

use crate::record::RunRecord;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub gap_lb_pct: f64,
    pub gap_sched_pct: f64,
    pub dfs_wall_ms: f64,
    pub sched_wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedupRow {
    pub n: usize,
    pub m: usize,
    pub lanes: usize,
    pub workers: usize,
    pub wall_ms: f64,
    pub serial_fraction: f64,
    pub theoretical: f64,
    pub observed: f64,
    pub limit: f64,
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("no run records to aggregate")]
    Empty,
    #[error("no successful dfs runs to aggregate")]
    NoDfsRuns,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn is_reference(r: &RunRecord) -> bool {
    r.lanes <= 1 && r.workers <= 1
}

fn dfs_by_size(records: &[RunRecord]) -> BTreeMap<(usize, usize), Vec<&RunRecord>> {
    let mut sizes: BTreeMap<(usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.algorithm == "dfs" && r.status == "ok") {
        sizes.entry((r.n, r.m)).or_default().push(r);
    }
    sizes
}

/// Mean gaps and runtimes per `(n, m)`. Gaps and DFS times come from the
/// single-lane serial runs when there are any, otherwise from all DFS runs.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<SizeSummary>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let sizes = dfs_by_size(records);
    if sizes.is_empty() {
        return Err(BenchError::NoDfsRuns);
    }
    Ok(sizes
        .into_iter()
        .map(|((n, m), rows)| {
            let reference: Vec<&RunRecord> = rows.iter().copied().filter(|r| is_reference(r)).collect();
            let rows = if reference.is_empty() { rows } else { reference };
            let sched = records.iter().filter(|r| r.algorithm == "sched" && r.n == n && r.m == m);
            SizeSummary {
                n,
                m,
                instances: rows.len(),
                gap_lb_pct: mean(rows.iter().filter_map(|r| r.gap_lb_pct)),
                gap_sched_pct: mean(rows.iter().filter_map(|r| r.gap_sched_pct)),
                dfs_wall_ms: mean(rows.iter().map(|r| r.wall_ms)),
                sched_wall_ms: mean(sched.map(|r| r.wall_ms)),
            }
        })
        .collect())
}

/// Observed and Amdahl speedups of every DFS configuration against the
/// single-lane serial runs of the same size. Sizes without such runs are
/// skipped. Parallel width is lanes times workers.
pub fn speedups(records: &[RunRecord]) -> Vec<SpeedupRow> {
    let mut out = Vec::new();
    for ((n, m), rows) in dfs_by_size(records) {
        let reference: Vec<&RunRecord> = rows.iter().copied().filter(|r| is_reference(r)).collect();
        if reference.is_empty() {
            continue;
        }
        let base = mean(reference.iter().map(|r| r.wall_ms));
        let s = if base > 0.0 {
            (mean(reference.iter().map(|r| r.serial_ms)) / base).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let mut configs: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for r in &rows {
            configs.entry((r.lanes.max(1), r.workers)).or_default().push(r.wall_ms);
        }
        for ((lanes, workers), walls) in configs {
            let wall = mean(walls);
            out.push(SpeedupRow {
                n,
                m,
                lanes,
                workers,
                wall_ms: wall,
                serial_fraction: s,
                theoretical: amdahl(s, lanes * workers.max(1)).expect("fraction clamped to [0, 1]"),
                observed: if wall > 0.0 { base / wall } else { 1.0 },
                limit: amdahl_limit(s).expect("fraction clamped to [0, 1]"),
            });
        }
    }
    out
}

/// Whitespace-separated columns with a `#` header, for gnuplot.
pub fn runtimes_dat(summary: &[SizeSummary]) -> String {
    let mut out = String::from("# n m n_over_m dfs_ms sched_ms gap_lb_pct gap_sched_pct\n");
    for s in summary {
        let _ = writeln!(
            out,
            "{} {} {:.4} {:.3} {:.3} {:.4} {:.4}",
            s.n,
            s.m,
            s.n as f64 / s.m as f64,
            s.dfs_wall_ms,
            s.sched_wall_ms,
            s.gap_lb_pct,
            s.gap_sched_pct
        );
    }
    out
}

pub fn speedup_dat(rows: &[SpeedupRow]) -> String {
    let mut out = String::from("# n m lanes workers wall_ms theoretical observed limit\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{} {} {} {} {:.3} {:.4} {:.4} {:.4}",
            r.n, r.m, r.lanes, r.workers, r.wall_ms, r.theoretical, r.observed, r.limit
        );
    }
    out
}
