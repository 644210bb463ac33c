//! Machine schedules (columns of the master program) and full solutions.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, JobId, MachineId};
use crate::pricing::DualPrices;
use crate::tree::NodeConstraints;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ColumnError {
    #[error("job {job} is not eligible on machine {machine}")]
    Ineligible { machine: MachineId, job: JobId },
    #[error("job {job} does not exist")]
    UnknownJob { job: JobId },
    #[error("machine {machine} does not exist")]
    UnknownMachine { machine: MachineId },
}

/// A job sequence on one machine together with its coefficient data.
///
/// Sequences may repeat jobs; such cyclic columns are legal in the linear
/// relaxation but never in an integer solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Column {
    machine: MachineId,
    seq: Vec<JobId>,
    cost: u64,
    makespan: u64,
    #[serde(skip)]
    coverage: Vec<(JobId, u32)>,
    #[serde(skip)]
    arcs: Vec<(JobId, JobId, u32)>,
}

impl Column {
    pub fn machine(&self) -> MachineId {
        self.machine
    }

    pub fn seq(&self) -> &[JobId] {
        &self.seq
    }

    /// Total weighted completion time.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn makespan(&self) -> u64 {
        self.makespan
    }

    /// Number of times `job` appears in the sequence.
    pub fn coverage(&self, job: JobId) -> u32 {
        self.coverage
            .binary_search_by_key(&job, |&(j, _)| j)
            .map_or(0, |idx| self.coverage[idx].1)
    }

    /// `(job, count)` pairs for every job in the sequence, ascending by job.
    pub fn coverage_entries(&self) -> &[(JobId, u32)] {
        &self.coverage
    }

    /// Number of times `pred` is immediately followed by `succ`, with
    /// `pred = 0` meaning the start of the schedule.
    pub fn arc_count(&self, pred: JobId, succ: JobId) -> u32 {
        self.arcs
            .binary_search_by_key(&(pred, succ), |&(i, j, _)| (i, j))
            .map_or(0, |idx| self.arcs[idx].2)
    }

    /// `(pred, succ, count)` for every adjacent pair of `(0, seq..)`.
    pub fn arc_entries(&self) -> &[(JobId, JobId, u32)] {
        &self.arcs
    }

    pub fn is_cyclic(&self) -> bool {
        self.coverage.iter().any(|&(_, c)| c > 1)
    }

    pub fn contains(&self, job: JobId) -> bool {
        self.coverage(job) > 0
    }
}

/// Builds the column for `seq` on `machine`, accumulating completion times
/// from the fictitious start job.
pub fn evaluate(inst: &Instance, machine: MachineId, seq: &[JobId]) -> Result<Column, ColumnError> {
    if machine >= inst.num_machines() {
        return Err(ColumnError::UnknownMachine { machine });
    }
    let mut clock = 0u64;
    let mut cost = 0u64;
    let mut prev = 0;
    let mut coverage: Vec<(JobId, u32)> = Vec::with_capacity(seq.len());
    let mut arcs: Vec<(JobId, JobId, u32)> = Vec::with_capacity(seq.len());
    for &job in seq {
        if job == 0 || job > inst.num_jobs() {
            return Err(ColumnError::UnknownJob { job });
        }
        if !inst.is_eligible(machine, job) {
            return Err(ColumnError::Ineligible { machine, job });
        }
        clock += u64::from(inst.setup(machine, prev, job)) + u64::from(inst.processing(machine, job));
        cost += u64::from(inst.weight(job)) * clock;
        coverage.push((job, 1));
        arcs.push((prev, job, 1));
        prev = job;
    }
    Ok(Column {
        machine,
        seq: seq.to_vec(),
        cost,
        makespan: clock,
        coverage: tally(coverage, |&(j, _)| j, |e| &mut e.1),
        arcs: tally(arcs, |&(i, j, _)| (i, j), |e| &mut e.2),
    })
}

fn tally<T, K: Ord>(mut items: Vec<T>, key: impl Fn(&T) -> K, count: impl Fn(&mut T) -> &mut u32) -> Vec<T> {
    items.sort_by_key(|t| key(t));
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        match out.last_mut() {
            Some(last) if key(last) == key(&item) => *count(last) += 1,
            _ => out.push(item),
        }
    }
    out
}

/// `c − Σ_j a_j·π_j − σ_k` for the column's machine `k`.
pub fn reduced_cost(col: &Column, duals: &DualPrices) -> f64 {
    let covered: f64 = col
        .coverage
        .iter()
        .map(|&(j, a)| f64::from(a) * duals.pi(j))
        .sum();
    col.cost as f64 - covered - duals.sigma(col.machine)
}

/// Whether `col` is an admissible schedule under the branching constraints.
///
/// A forbidden arc `(k, i, j)` excludes columns on `k` using `i → j`. A
/// forced arc `(k, i, j)` requires, on machine `k`, that every occurrence of
/// `i` is directly followed by `j` and every occurrence of `j` directly
/// preceded by `i`; on other machines neither job may appear (only `j` when
/// `i` is the start job).
pub fn satisfies(col: &Column, constraints: &NodeConstraints) -> bool {
    for e in constraints.forbidden() {
        if e.machine == col.machine && col.arc_count(e.pred, e.succ) > 0 {
            return false;
        }
    }
    for e in constraints.forced() {
        if e.machine == col.machine {
            let pred_ok = if e.pred == 0 {
                col.seq.first() == Some(&e.succ)
            } else {
                col.seq
                    .iter()
                    .enumerate()
                    .filter(|&(_, &job)| job == e.pred)
                    .all(|(r, _)| col.seq.get(r + 1) == Some(&e.succ))
            };
            if !pred_ok {
                return false;
            }
            let succ_ok = col.seq.iter().enumerate().filter(|&(_, &job)| job == e.succ).all(|(r, _)| {
                let before = if r == 0 { 0 } else { col.seq[r - 1] };
                before == e.pred
            });
            if !succ_ok {
                return false;
            }
        } else if col.contains(e.succ) || (e.pred != 0 && col.contains(e.pred)) {
            return false;
        }
    }
    true
}

/// An integer solution: at most one column per machine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FullSolution {
    columns: Vec<Column>,
}

impl FullSolution {
    /// Empty columns are dropped; remaining columns are ordered by machine.
    pub fn new(mut columns: Vec<Column>) -> Self {
        columns.retain(|c| !c.seq.is_empty());
        columns.sort_by_key(|c| c.machine);
        FullSolution { columns }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn objective(&self) -> u64 {
        self.columns.iter().map(Column::cost).sum()
    }

    pub fn makespan(&self) -> u64 {
        self.columns.iter().map(Column::makespan).max().unwrap_or(0)
    }

    pub fn column_on(&self, machine: MachineId) -> Option<&Column> {
        self.columns.iter().find(|c| c.machine == machine)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Coverage { job: JobId, count: u32 },
    UnknownJob { job: JobId },
    Ineligible { machine: MachineId, job: JobId },
    Cyclic { machine: MachineId },
    MachineReused { machine: MachineId },
    UnknownMachine { machine: MachineId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Coverage { job, count } => write!(f, "job {job} covered {count} times"),
            Violation::UnknownJob { job } => write!(f, "job {job} does not exist"),
            Violation::Ineligible { machine, job } => {
                write!(f, "job {job} not eligible on machine {machine}")
            }
            Violation::Cyclic { machine } => write!(f, "schedule on machine {machine} repeats a job"),
            Violation::MachineReused { machine } => {
                write!(f, "machine {machine} carries more than one schedule")
            }
            Violation::UnknownMachine { machine } => write!(f, "machine {machine} does not exist"),
        }
    }
}

/// Returns the objective of a feasible solution, or every violation found.
pub fn verify(inst: &Instance, sol: &FullSolution) -> Result<u64, Vec<Violation>> {
    let mut violations = Vec::new();
    let mut counts = vec![0u32; inst.num_jobs() + 1];
    let mut used = vec![false; inst.num_machines()];
    for col in &sol.columns {
        let k = col.machine;
        if k >= inst.num_machines() {
            violations.push(Violation::UnknownMachine { machine: k });
            continue;
        }
        if std::mem::replace(&mut used[k], true) {
            violations.push(Violation::MachineReused { machine: k });
        }
        if col.is_cyclic() {
            violations.push(Violation::Cyclic { machine: k });
        }
        for &j in &col.seq {
            if j == 0 || j > inst.num_jobs() {
                violations.push(Violation::UnknownJob { job: j });
                continue;
            }
            counts[j] += 1;
            if !inst.is_eligible(k, j) {
                violations.push(Violation::Ineligible { machine: k, job: j });
            }
        }
    }
    for j in inst.jobs() {
        if counts[j] != 1 {
            violations.push(Violation::Coverage { job: j, count: counts[j] });
        }
    }
    if violations.is_empty() {
        Ok(sol.objective())
    } else {
        Err(violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GenConfig};
    use crate::tree::Edge;
    use proptest::prelude::*;

    /// Two jobs on one machine: s_01=2, p_1=10, w_1=3, s_12=1, p_2=5, w_2=2.
    pub(crate) fn two_job_instance() -> Instance {
        let mut setup = vec![vec![0; 2]; 3];
        setup[0] = vec![2, 4];
        setup[1][1] = 1;
        setup[2][0] = 3;
        Instance::from_parts(vec![3, 2], vec![vec![true, true]], vec![vec![10, 5]], vec![setup]).unwrap()
    }

    fn duals(pi: Vec<f64>, sigma: Vec<f64>) -> DualPrices {
        DualPrices::new(pi, sigma)
    }

    #[test]
    fn evaluate_examples() {
        let inst = two_job_instance();
        let one = evaluate(&inst, 0, &[1]).unwrap();
        assert_eq!((one.makespan(), one.cost()), (12, 36));

        let empty = evaluate(&inst, 0, &[]).unwrap();
        assert_eq!(empty.cost(), 0);
        assert_eq!(empty.coverage(1) + empty.coverage(2), 0);

        let both = evaluate(&inst, 0, &[1, 2]).unwrap();
        // prefix sums by hand: C1 = 2 + 10, C2 = C1 + 1 + 5
        let (c1, c2) = (2 + 10, 2 + 10 + 1 + 5);
        assert_eq!(both.cost(), 3 * c1 + 2 * c2);
        assert_eq!(both.cost(), 72);
        assert_eq!(both.arc_count(0, 1), 1);
        assert_eq!(both.arc_count(1, 2), 1);
        assert_eq!(both.arc_count(2, 1), 0);
    }

    #[test]
    fn evaluate_rejects_ineligible() {
        let inst = Instance::from_parts(
            vec![1, 1],
            vec![vec![true, false], vec![true, true]],
            vec![vec![3, 3], vec![3, 3]],
            vec![vec![vec![0, 0]; 3]; 2],
        )
        .unwrap();
        assert_eq!(
            evaluate(&inst, 0, &[1, 2]),
            Err(ColumnError::Ineligible { machine: 0, job: 2 })
        );
        assert!(evaluate(&inst, 0, &[3]).is_err());
        assert!(evaluate(&inst, 2, &[1]).is_err());
    }

    #[test]
    fn cyclic_counts() {
        let inst = two_job_instance();
        let col = evaluate(&inst, 0, &[1, 2, 1]).unwrap();
        assert_eq!(col.coverage(1), 2);
        assert!(col.is_cyclic());
        assert_eq!(col.arc_count(2, 1), 1);
    }

    #[test]
    fn reduced_cost_examples() {
        let inst = two_job_instance();
        let col = evaluate(&inst, 0, &[1, 2]).unwrap();
        assert_eq!(reduced_cost(&col, &duals(vec![0.0, 0.0], vec![0.0])), 72.0);
        assert_eq!(reduced_cost(&col, &duals(vec![36.0, 36.0], vec![0.0])), 0.0);
        assert_eq!(reduced_cost(&col, &duals(vec![40.0, 40.0], vec![-5.0])), 72.0 - 80.0 + 5.0);
    }

    #[test]
    fn satisfies_examples() {
        let inst = Instance::from_parts(
            vec![1, 1],
            vec![vec![true, true], vec![true, true]],
            vec![vec![3, 3], vec![3, 3]],
            vec![vec![vec![0, 0]; 3]; 2],
        )
        .unwrap();
        let arc = Edge::new(0, 1, 2);
        let col = evaluate(&inst, 0, &[1, 2]).unwrap();
        let forbid = NodeConstraints::default().with_forbidden(arc);
        let force = NodeConstraints::default().with_forced(arc);
        assert!(!satisfies(&col, &forbid));
        assert!(satisfies(&col, &force));

        let other = evaluate(&inst, 1, &[2]).unwrap();
        assert!(!satisfies(&other, &force));
        let reversed = evaluate(&inst, 0, &[2, 1]).unwrap();
        assert!(!satisfies(&reversed, &force));
        let trailing = evaluate(&inst, 0, &[2, 1]).unwrap();
        assert!(satisfies(&trailing, &NodeConstraints::default().with_forbidden(arc)));
        let ends_with_pred = evaluate(&inst, 0, &[1]).unwrap();
        assert!(!satisfies(&ends_with_pred, &force));
        let neither = evaluate(&inst, 0, &[]).unwrap();
        assert!(satisfies(&neither, &force));

        let first = NodeConstraints::default().with_forced(Edge::new(0, 0, 2));
        assert!(!satisfies(&col, &first));
        assert!(satisfies(&reversed, &first));
        // start-job arcs pin only the successor
        assert!(satisfies(&evaluate(&inst, 1, &[1]).unwrap(), &first));
        assert!(!satisfies(&other, &first));
    }

    #[test]
    fn verify_examples() {
        let inst = Instance::from_parts(
            vec![3],
            vec![vec![true]],
            vec![vec![10]],
            vec![vec![vec![2], vec![0]]],
        )
        .unwrap();
        let sol = FullSolution::new(vec![evaluate(&inst, 0, &[1]).unwrap()]);
        assert_eq!(verify(&inst, &sol), Ok(36));

        let twice = FullSolution::new(vec![evaluate(&inst, 0, &[1, 1]).unwrap()]);
        let errs = verify(&inst, &twice).unwrap_err();
        assert!(errs.iter().any(|v| v.to_string() == "job 1 covered 2 times"));
        assert!(errs.contains(&Violation::Cyclic { machine: 0 }));

        let none = FullSolution::new(vec![]);
        assert_eq!(
            verify(&inst, &none),
            Err(vec![Violation::Coverage { job: 1, count: 0 }])
        );
    }

    #[test]
    fn verify_flags_reused_machine() {
        let inst = two_job_instance();
        let sol = FullSolution::new(vec![
            evaluate(&inst, 0, &[1]).unwrap(),
            evaluate(&inst, 0, &[2]).unwrap(),
        ]);
        assert_eq!(
            verify(&inst, &sol),
            Err(vec![Violation::MachineReused { machine: 0 }])
        );
    }

    proptest! {
        #[test]
        fn cost_is_position_additive(seed in 0u64..500, raw in proptest::collection::vec(1usize..=6, 0..8), extra in 1usize..=6) {
            let mut cfg = GenConfig::standard(6, 1, seed);
            cfg.eligibility = 1.0;
            let inst = generate(&cfg).unwrap();
            let base = evaluate(&inst, 0, &raw).unwrap();
            let mut longer = raw.clone();
            longer.push(extra);
            let grown = evaluate(&inst, 0, &longer).unwrap();
            let last = raw.last().copied().unwrap_or(0);
            let step = base.makespan()
                + u64::from(inst.setup(0, last, extra))
                + u64::from(inst.processing(0, extra));
            prop_assert_eq!(grown.cost(), base.cost() + u64::from(inst.weight(extra)) * step);
            let zero = DualPrices::zeros(6, 1);
            prop_assert_eq!(reduced_cost(&grown, &zero), grown.cost() as f64);
        }
    }
}
