//! Column generation for one node's linear relaxation.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, warn};
use thiserror::Error;

use crate::column::Column;
use crate::instance::{Instance, JobId, MachineId};
use crate::lp::{LpColumn, LpError, LpProblem, LpSolution, LpStatus, RowKind, Simplex};
use crate::pricing::{extract_columns, DualPrices, PredecessorSets, Pricer, DEFAULT_EPS};
use crate::tree::NodeConstraints;

#[derive(Clone, Debug, PartialEq)]
pub struct ColGenParams {
    /// Columns added per pricing round, across all machines.
    pub max_cols: usize,
    pub eps: f64,
    /// Restricted master solves allowed per node.
    pub max_iterations: usize,
}

impl Default for ColGenParams {
    fn default() -> Self {
        ColGenParams {
            max_cols: 20,
            eps: DEFAULT_EPS,
            max_iterations: 10_000,
        }
    }
}

/// Wall time spent per phase. Pricing and branching are the machine-indexed
/// loops that run across lanes; everything else counts as serial.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub master: Duration,
    pub pricing: Duration,
    pub extraction: Duration,
    pub branching: Duration,
}

impl PhaseTimes {
    pub fn parallelizable(&self) -> Duration {
        self.pricing + self.branching
    }

    pub fn add(&mut self, other: &PhaseTimes) {
        self.master += other.master;
        self.pricing += other.pricing;
        self.extraction += other.extraction;
        self.branching += other.branching;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxationStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct RelaxationResult {
    pub status: RelaxationStatus,
    pub objective: f64,
    /// Every column of the final restricted master, warm start first.
    pub pool: Vec<Arc<Column>>,
    /// Master value of each pool column.
    pub x: Vec<f64>,
    pub duals: DualPrices,
    pub iterations: usize,
    pub columns_generated: usize,
    /// Restricted master objective after each solve.
    pub objective_trace: Vec<f64>,
    pub timing: PhaseTimes,
}

#[derive(Debug, Error)]
pub enum ColGenError {
    #[error("column generation hit its cap of {cap} master solves (objective {objective}, {pool_size} columns)")]
    IterationCap {
        cap: usize,
        objective: f64,
        pool_size: usize,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Big-M penalty strictly above the cost of any genuine schedule set.
pub fn big_m(inst: &Instance, horizon: usize) -> f64 {
    (inst.total_weight() as f64) * horizon as f64 + 1.0
}

fn lp_column(inst: &Instance, col: &Column) -> LpColumn {
    let mut entries: Vec<(usize, f64)> = col
        .coverage_entries()
        .iter()
        .map(|&(j, a)| (j - 1, f64::from(a)))
        .collect();
    entries.push((inst.num_jobs() + col.machine(), 1.0));
    LpColumn {
        cost: col.cost() as f64,
        entries,
    }
}

/// Splits per-row master duals into job prices and machine prices.
pub fn split_duals(inst: &Instance, duals: &[f64]) -> DualPrices {
    let n = inst.num_jobs();
    DualPrices::new(duals[..n].to_vec(), duals[n..].to_vec())
}

/// Solves the relaxation of a node whose constraints are `constraints`,
/// starting from `warm_pool` (which must already satisfy them).
pub fn solve_relaxation(
    inst: &Instance,
    horizon: usize,
    constraints: &NodeConstraints,
    warm_pool: Vec<Arc<Column>>,
    pricer: &Pricer,
    params: &ColGenParams,
) -> Result<RelaxationResult, ColGenError> {
    let (n, m) = (inst.num_jobs(), inst.num_machines());
    let mut problem = LpProblem::new(big_m(inst, horizon));
    for _ in 0..n {
        problem.add_row(RowKind::Eq, 1.0);
    }
    for _ in 0..m {
        problem.add_row(RowKind::Le, 1.0);
    }
    let mut seen: HashSet<(MachineId, Vec<JobId>)> = HashSet::with_capacity(warm_pool.len());
    let mut pool: Vec<Arc<Column>> = Vec::with_capacity(warm_pool.len());
    for col in warm_pool {
        if seen.insert((col.machine(), col.seq().to_vec())) {
            problem.add_column(lp_column(inst, &col));
            pool.push(col);
        }
    }
    let mut simplex = Simplex::new(problem)?;
    let preds = PredecessorSets::derive(inst, constraints);

    let mut timing = PhaseTimes::default();
    let mut trace = Vec::new();
    let mut generated = 0usize;
    let mut iterations = 0usize;
    let solution: LpSolution = loop {
        if iterations >= params.max_iterations {
            return Err(ColGenError::IterationCap {
                cap: params.max_iterations,
                objective: trace.last().copied().unwrap_or(f64::INFINITY),
                pool_size: pool.len(),
            });
        }
        iterations += 1;

        let started = Instant::now();
        let sol = simplex.solve()?;
        timing.master += started.elapsed();
        trace.push(sol.objective);
        let duals = split_duals(inst, &sol.duals);

        let started = Instant::now();
        let outcome = pricer.price(inst, &preds, &duals, horizon);
        timing.pricing += started.elapsed();
        if outcome.min >= -params.eps {
            break sol;
        }

        let started = Instant::now();
        let fresh: Vec<Column> = extract_columns(inst, &outcome.table, &duals, params.max_cols, params.eps)
            .into_iter()
            .filter(|c| !seen.contains(&(c.machine(), c.seq().to_vec())))
            .collect();
        timing.extraction += started.elapsed();
        if fresh.is_empty() {
            warn!(
                "pricing found reduced cost {} but only columns already in the pool; stopping",
                outcome.min
            );
            break sol;
        }
        for col in fresh {
            seen.insert((col.machine(), col.seq().to_vec()));
            simplex.add_column(lp_column(inst, &col))?;
            pool.push(Arc::new(col));
            generated += 1;
        }
    };

    let status = match solution.status {
        LpStatus::Optimal => RelaxationStatus::Optimal,
        LpStatus::Infeasible => RelaxationStatus::Infeasible,
    };
    debug!(
        "relaxation {:?}: objective {:.4} after {} master solves, {} new columns",
        status, solution.objective, iterations, generated
    );
    Ok(RelaxationResult {
        status,
        objective: solution.objective,
        duals: split_duals(inst, &solution.duals),
        x: solution.x,
        pool,
        iterations,
        columns_generated: generated,
        objective_trace: trace,
        timing,
    })
}
