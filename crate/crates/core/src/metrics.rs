//! Solution-quality gaps and parallel speedup accounting.

use std::time::Duration;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MetricError {
    #[error("gap denominator must be positive, got {0}")]
    NonPositiveDenominator(f64),
    #[error("serial fraction {0} outside [0, 1]")]
    SerialFraction(f64),
    #[error("lane count must be at least 1")]
    ZeroLanes,
    #[error("speedup needs a single-lane reference run")]
    MissingReference,
}

/// `100·(Z − LB)/LB`: an upper bound on the distance to the optimum.
pub fn gap_lb(objective: f64, lower_bound: f64) -> Result<f64, MetricError> {
    if lower_bound <= 0.0 {
        return Err(MetricError::NonPositiveDenominator(lower_bound));
    }
    Ok(100.0 * (objective - lower_bound) / lower_bound)
}

/// `100·(Z_SCHED − Z_DFS)/Z_SCHED`: improvement over the greedy baseline.
pub fn gap_sched(sched_objective: f64, dfs_objective: f64) -> Result<f64, MetricError> {
    if sched_objective <= 0.0 {
        return Err(MetricError::NonPositiveDenominator(sched_objective));
    }
    Ok(100.0 * (sched_objective - dfs_objective) / sched_objective)
}

/// Amdahl speedup `1 / (s + (1 − s)/k)` for serial fraction `s` on `k` lanes.
pub fn amdahl(serial_fraction: f64, lanes: usize) -> Result<f64, MetricError> {
    if !(0.0..=1.0).contains(&serial_fraction) {
        return Err(MetricError::SerialFraction(serial_fraction));
    }
    if lanes == 0 {
        return Err(MetricError::ZeroLanes);
    }
    Ok(1.0 / (serial_fraction + (1.0 - serial_fraction) / lanes as f64))
}

/// The `k → ∞` limit `1/s`.
pub fn amdahl_limit(serial_fraction: f64) -> Result<f64, MetricError> {
    if !(0.0..=1.0).contains(&serial_fraction) {
        return Err(MetricError::SerialFraction(serial_fraction));
    }
    Ok(1.0 / serial_fraction)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub dfs_objective: f64,
    pub lower_bound: f64,
    pub sched_objective: f64,
    pub gap_lb_pct: f64,
    pub gap_sched_pct: f64,
}

impl GapReport {
    pub fn new(dfs_objective: f64, lower_bound: f64, sched_objective: f64) -> Result<Self, MetricError> {
        Ok(GapReport {
            dfs_objective,
            lower_bound,
            sched_objective,
            gap_lb_pct: gap_lb(dfs_objective, lower_bound)?,
            gap_sched_pct: gap_sched(sched_objective, dfs_objective)?,
        })
    }
}

/// Timing of one run: total wall time and the part spent outside the
/// parallelizable loops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunTiming {
    pub lanes: usize,
    pub wall: Duration,
    pub serial: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRecord {
    pub lanes: usize,
    pub wall: Duration,
    pub serial: Duration,
    pub parallel: Duration,
    /// Serial fraction measured on the single-lane reference.
    pub serial_fraction: f64,
    pub observed: f64,
    pub theoretical: f64,
}

/// One record per run, all relative to the single-lane run in `runs`.
pub fn measure(runs: &[RunTiming]) -> Result<Vec<SpeedupRecord>, MetricError> {
    let reference = runs.iter().find(|r| r.lanes == 1).ok_or(MetricError::MissingReference)?;
    let base = reference.wall.as_secs_f64();
    let s = if base > 0.0 {
        (reference.serial.as_secs_f64() / base).clamp(0.0, 1.0)
    } else {
        1.0
    };
    runs.iter()
        .map(|r| {
            let wall = r.wall.as_secs_f64();
            Ok(SpeedupRecord {
                lanes: r.lanes,
                wall: r.wall,
                serial: r.serial,
                parallel: r.wall.saturating_sub(r.serial),
                serial_fraction: s,
                observed: if wall > 0.0 { base / wall } else { 1.0 },
                theoretical: amdahl(s, r.lanes)?,
            })
        })
        .collect()
}
