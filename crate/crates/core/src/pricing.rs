//! Exact pricing by dynamic programming over completion times.
//!
//! For machine `k`, `f(j, t)` is the least reduced cost of any schedule on
//! `k` that ends with job `j` completing exactly at time `t`:
//!
//! ```text
//! f(0, 0) = −σ_k
//! f(j, t) = min_{i ∈ P_j} f(i, t − s_ij − p_j) + w_j·t − π_j     (t ≥ 1, j ≥ 1)
//! ```
//!
//! Schedules may repeat jobs. Machines are independent, so the machine loop
//! is spread over a configurable number of lanes; every lane count produces
//! the same table.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::column::{evaluate, Column};
use crate::instance::{Instance, JobId, MachineId};
use crate::tree::NodeConstraints;

/// Reduced-cost threshold below which a column is considered improving.
pub const DEFAULT_EPS: f64 = 1e-7;

const NO_PARENT: u32 = u32::MAX;

/// Dual prices of the restricted master: `π_j` per job, `σ_k` per machine.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPrices {
    pi: Vec<f64>,
    sigma: Vec<f64>,
}

impl DualPrices {
    /// `pi[j - 1]` is the price of job `j`.
    pub fn new(pi: Vec<f64>, sigma: Vec<f64>) -> Self {
        let mut by_job = Vec::with_capacity(pi.len() + 1);
        by_job.push(0.0);
        by_job.extend(pi);
        DualPrices { pi: by_job, sigma }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        DualPrices::new(vec![0.0; n], vec![0.0; m])
    }

    #[inline]
    pub fn pi(&self, job: JobId) -> f64 {
        self.pi[job]
    }

    #[inline]
    pub fn sigma(&self, machine: MachineId) -> f64 {
        self.sigma[machine]
    }

    pub fn num_jobs(&self) -> usize {
        self.pi.len() - 1
    }

    pub fn num_machines(&self) -> usize {
        self.sigma.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct MachinePreds {
    jobs: Vec<JobId>,
    preds: Vec<Vec<JobId>>,
    terminal: Vec<bool>,
}

/// Allowed immediate predecessors `P_j^k` of every job on every machine,
/// plus which jobs may end a schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredecessorSets {
    machines: Vec<MachinePreds>,
}

impl PredecessorSets {
    /// Every eligible job may follow the start job or any other eligible job.
    pub fn unrestricted(inst: &Instance) -> Self {
        Self::derive(inst, &NodeConstraints::default())
    }

    /// Applies branching constraints:
    ///
    /// * forced `(k, i, j)`: on `k`, `j` may only follow `i` and `i` may only
    ///   precede `j` (a schedule cannot end with `i`); on other machines `j`
    ///   and, unless `i` is the start job, `i` are ineligible;
    /// * forbidden `(k, i, j)`: `i` is removed from `P_j^k`.
    pub fn derive(inst: &Instance, constraints: &NodeConstraints) -> Self {
        let n = inst.num_jobs();
        let mut eligible: Vec<Vec<bool>> = inst
            .machines()
            .map(|k| (0..=n).map(|j| inst.is_eligible(k, j)).collect())
            .collect();
        for e in constraints.forced() {
            for (k, row) in eligible.iter_mut().enumerate() {
                if k != e.machine {
                    row[e.succ] = false;
                    if e.pred != 0 {
                        row[e.pred] = false;
                    }
                }
            }
        }
        let machines = inst
            .machines()
            .map(|k| {
                let jobs: Vec<JobId> = (1..=n).filter(|&j| eligible[k][j]).collect();
                let mut preds: Vec<Vec<JobId>> = jobs
                    .iter()
                    .map(|&j| {
                        std::iter::once(0)
                            .chain(jobs.iter().copied().filter(|&i| i != j))
                            .collect()
                    })
                    .collect();
                let mut terminal = vec![true; jobs.len()];
                for e in constraints.forced().filter(|e| e.machine == k) {
                    for (idx, &j) in jobs.iter().enumerate() {
                        if j == e.succ {
                            preds[idx].retain(|&i| i == e.pred);
                        } else {
                            preds[idx].retain(|&i| i != e.pred);
                        }
                        if j == e.pred {
                            terminal[idx] = false;
                        }
                    }
                }
                for e in constraints.forbidden().filter(|e| e.machine == k) {
                    if let Ok(idx) = jobs.binary_search(&e.succ) {
                        preds[idx].retain(|&i| i != e.pred);
                    }
                }
                MachinePreds { jobs, preds, terminal }
            })
            .collect();
        PredecessorSets { machines }
    }

    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    /// Jobs that may run on `machine`, ascending.
    pub fn jobs(&self, machine: MachineId) -> &[JobId] {
        &self.machines[machine].jobs
    }

    /// `P_j^k`, or `None` when `job` may not run on `machine`.
    pub fn preds(&self, machine: MachineId, job: JobId) -> Option<&[JobId]> {
        let mp = &self.machines[machine];
        mp.jobs.binary_search(&job).ok().map(|idx| mp.preds[idx].as_slice())
    }

    /// Whether a schedule on `machine` may end with `job`.
    pub fn can_end(&self, machine: MachineId, job: JobId) -> bool {
        let mp = &self.machines[machine];
        mp.jobs.binary_search(&job).map_or(false, |idx| mp.terminal[idx])
    }
}

/// DP values and parent pointers for one machine, stored time-major.
#[derive(Clone, Debug, PartialEq)]
struct MachineTable {
    /// Local index 0 is the start job; local `l ≥ 1` is `jobs[l - 1]`.
    jobs: Vec<JobId>,
    terminal: Vec<bool>,
    values: Vec<f64>,
    parents: Vec<u32>,
}

impl MachineTable {
    fn stride(&self) -> usize {
        self.jobs.len() + 1
    }

    fn local(&self, job: JobId) -> Option<usize> {
        if job == 0 {
            Some(0)
        } else {
            self.jobs.binary_search(&job).ok().map(|i| i + 1)
        }
    }
}

/// `f^k(j, t)` for all machines, jobs and times `0..=T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PricingTable {
    horizon: usize,
    machines: Vec<MachineTable>,
}

impl PricingTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `+∞` for unreachable states and for jobs not allowed on `machine`.
    pub fn value(&self, machine: MachineId, job: JobId, t: usize) -> f64 {
        let mt = &self.machines[machine];
        match mt.local(job) {
            Some(l) if t <= self.horizon => mt.values[t * mt.stride() + l],
            _ => f64::INFINITY,
        }
    }

    /// Predecessor job and its completion time for a finite state.
    pub fn parent(&self, inst: &Instance, machine: MachineId, job: JobId, t: usize) -> Option<(JobId, usize)> {
        let mt = &self.machines[machine];
        let l = mt.local(job).filter(|&l| l > 0)?;
        let p = mt.parents[t * mt.stride() + l];
        if p == NO_PARENT {
            return None;
        }
        let pred = if p == 0 { 0 } else { mt.jobs[p as usize - 1] };
        let back = inst.setup(machine, pred, job) as usize + inst.processing(machine, job) as usize;
        Some((pred, t - back))
    }

    /// Job sequence of the schedule realizing state `(machine, job, t)`.
    pub fn backtrack(&self, inst: &Instance, machine: MachineId, job: JobId, t: usize) -> Vec<JobId> {
        let mut seq = Vec::new();
        let (mut j, mut time) = (job, t);
        while j != 0 {
            seq.push(j);
            match self.parent(inst, machine, j, time) {
                Some((pred, earlier)) => {
                    j = pred;
                    time = earlier;
                }
                None => break,
            }
        }
        seq.reverse();
        seq
    }

    fn admissible_states(&self) -> impl Iterator<Item = (f64, MachineId, JobId, usize)> + '_ {
        self.machines.iter().enumerate().flat_map(move |(k, mt)| {
            let stride = mt.stride();
            mt.jobs
                .iter()
                .enumerate()
                .filter(move |&(idx, _)| mt.terminal[idx])
                .flat_map(move |(idx, &j)| {
                    (1..=self.horizon).map(move |t| (mt.values[t * stride + idx + 1], k, j, t))
                })
        })
    }
}

/// Result of one pricing call.
#[derive(Clone, Debug, PartialEq)]
pub struct PricingOutcome {
    pub table: PricingTable,
    /// Least `f^k(j, t)` over admissible end states with `j ≥ 1`, `t ≥ 1`.
    pub min: f64,
    /// Lexicographically smallest `(k, j, t)` attaining `min`.
    pub argmin: Option<(MachineId, JobId, usize)>,
}

fn price_machine(
    inst: &Instance,
    preds: &PredecessorSets,
    duals: &DualPrices,
    horizon: usize,
    k: MachineId,
) -> MachineTable {
    let mp = &preds.machines[k];
    let nk = mp.jobs.len();
    let stride = nk + 1;
    // (local predecessor, setup + processing) per local job
    let transitions: Vec<Vec<(u32, usize)>> = mp
        .jobs
        .iter()
        .zip(&mp.preds)
        .map(|(&j, ps)| {
            ps.iter()
                .map(|&i| {
                    let li = if i == 0 {
                        0
                    } else {
                        mp.jobs.binary_search(&i).expect("predecessor is eligible") + 1
                    };
                    let d = inst.setup(k, i, j) as usize + inst.processing(k, j) as usize;
                    (li as u32, d)
                })
                .collect()
        })
        .collect();
    let weights: Vec<f64> = mp.jobs.iter().map(|&j| f64::from(inst.weight(j))).collect();
    let prices: Vec<f64> = mp.jobs.iter().map(|&j| duals.pi(j)).collect();

    let mut values = vec![f64::INFINITY; stride * (horizon + 1)];
    let mut parents = vec![NO_PARENT; stride * (horizon + 1)];
    values[0] = -duals.sigma(k);
    for t in 1..=horizon {
        for idx in 0..nk {
            let mut best = f64::INFINITY;
            let mut arg = NO_PARENT;
            for &(li, d) in &transitions[idx] {
                if d <= t {
                    let v = values[(t - d) * stride + li as usize];
                    if v < best {
                        best = v;
                        arg = li;
                    }
                }
            }
            if best < f64::INFINITY {
                let cell = t * stride + idx + 1;
                values[cell] = best + weights[idx] * t as f64 - prices[idx];
                parents[cell] = arg;
            }
        }
    }
    MachineTable {
        jobs: mp.jobs.clone(),
        terminal: mp.terminal.clone(),
        values,
        parents,
    }
}

fn assemble(horizon: usize, machines: Vec<MachineTable>) -> PricingOutcome {
    let table = PricingTable { horizon, machines };
    let mut min = f64::INFINITY;
    let mut argmin = None;
    // admissible_states iterates in lexicographic (k, j, t) order
    for (v, k, j, t) in table.admissible_states() {
        if v < min {
            min = v;
            argmin = Some((k, j, t));
        }
    }
    PricingOutcome { table, min, argmin }
}

/// Serial pricing over all machines.
pub fn price(inst: &Instance, preds: &PredecessorSets, duals: &DualPrices, horizon: usize) -> PricingOutcome {
    let machines = inst
        .machines()
        .map(|k| price_machine(inst, preds, duals, horizon, k))
        .collect();
    assemble(horizon, machines)
}

/// Runs pricing (and other machine-indexed loops) across a fixed number of
/// lanes.
pub struct Pricer {
    lanes: usize,
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Pricer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pricer").field("lanes", &self.lanes).finish()
    }
}

impl Default for Pricer {
    fn default() -> Self {
        Pricer::new(1)
    }
}

impl Pricer {
    pub fn new(lanes: usize) -> Self {
        let mut pricer = Pricer { lanes: 1, pool: None };
        pricer.set_lanes(lanes);
        pricer
    }

    /// Sets the machine-loop width. Zero is treated as one.
    pub fn set_lanes(&mut self, count: usize) {
        let count = count.max(1);
        self.lanes = count;
        self.pool = (count > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .thread_name(|i| format!("pricing-lane-{i}"))
                .build()
                .expect("failed to start pricing lanes")
        });
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    /// Maps `f` over machine indices `0..m`, in parallel when lanes > 1.
    /// Output order is machine order.
    pub fn map_machines<T, F>(&self, m: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(MachineId) -> T + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| (0..m).into_par_iter().map(&f).collect()),
            None => (0..m).map(f).collect(),
        }
    }

    pub fn price(
        &self,
        inst: &Instance,
        preds: &PredecessorSets,
        duals: &DualPrices,
        horizon: usize,
    ) -> PricingOutcome {
        let machines = self.map_machines(inst.num_machines(), |k| {
            price_machine(inst, preds, duals, horizon, k)
        });
        assemble(horizon, machines)
    }
}

/// Backtracks up to `max_cols` columns from states with value below `−eps`,
/// most negative first, ties broken by `(k, j, t)`.
pub fn extract_columns(
    inst: &Instance,
    table: &PricingTable,
    duals: &DualPrices,
    max_cols: usize,
    eps: f64,
) -> Vec<Column> {
    debug_assert!(
        (0..duals.num_machines()).all(|k| duals.sigma(k) <= crate::lp::FEAS_TOL),
        "machine duals must be nonpositive at master optimality"
    );
    let mut candidates: Vec<(f64, MachineId, JobId, usize)> =
        table.admissible_states().filter(|s| s.0 < -eps).collect();
    let order = |a: &(f64, MachineId, JobId, usize), b: &(f64, MachineId, JobId, usize)| {
        a.0.total_cmp(&b.0).then((a.1, a.2, a.3).cmp(&(b.1, b.2, b.3)))
    };
    if candidates.len() > max_cols {
        candidates.select_nth_unstable_by(max_cols, order);
        candidates.truncate(max_cols);
    }
    candidates.sort_unstable_by(order);

    let mut seen: HashSet<(MachineId, Vec<JobId>)> = HashSet::new();
    let mut columns = Vec::with_capacity(candidates.len());
    for (_, k, j, t) in candidates {
        let seq = table.backtrack(inst, k, j, t);
        if seen.insert((k, seq.clone())) {
            columns.push(evaluate(inst, k, &seq).expect("pricing only extends eligible jobs"));
        }
    }
    columns
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::reduced_cost;
    use crate::instance::{generate, GenConfig};
    use crate::tree::Edge;

    fn single() -> Instance {
        Instance::from_parts(vec![3], vec![vec![true]], vec![vec![10]], vec![vec![vec![2], vec![0]]])
            .unwrap()
    }

    #[test]
    fn zero_duals_have_no_negative_state() {
        let inst = generate(&GenConfig::standard(5, 2, 3)).unwrap();
        let out = price(&inst, &PredecessorSets::unrestricted(&inst), &DualPrices::zeros(5, 2), 200);
        assert!(out.min >= 0.0);
    }

    #[test]
    fn single_job_single_path() {
        let inst = single();
        let duals = DualPrices::new(vec![100.0], vec![0.0]);
        let out = price(&inst, &PredecessorSets::unrestricted(&inst), &duals, 12);
        assert_eq!(out.table.value(0, 1, 12), 36.0 - 100.0);
        assert_eq!(out.min, -64.0);
        assert_eq!(out.argmin, Some((0, 1, 12)));
        assert_eq!(out.table.value(0, 1, 11), f64::INFINITY);

        let cols = extract_columns(&inst, &out.table, &duals, 20, DEFAULT_EPS);
        assert_eq!(cols.len(), 1);
        assert_eq!((cols[0].machine(), cols[0].seq()), (0, &[1][..]));
    }

    #[test]
    fn nothing_to_extract_without_negative_states() {
        let inst = single();
        let duals = DualPrices::new(vec![10.0], vec![0.0]);
        let out = price(&inst, &PredecessorSets::unrestricted(&inst), &duals, 12);
        assert!(extract_columns(&inst, &out.table, &duals, 20, DEFAULT_EPS).is_empty());
    }

    #[test]
    fn extracted_columns_agree_with_reduced_cost() {
        let inst = generate(&GenConfig::standard(8, 3, 17)).unwrap();
        let duals = DualPrices::new((1..=8).map(|j| 150.0 * j as f64).collect(), vec![-5.0, 0.0, -20.0]);
        let out = price(&inst, &PredecessorSets::unrestricted(&inst), &duals, 300);
        let cols = extract_columns(&inst, &out.table, &duals, 20, DEFAULT_EPS);
        let mut negative = 0;
        for k in 0..3 {
            for j in 1..=8 {
                negative += (1..=300).filter(|&t| out.table.value(k, j, t) < -DEFAULT_EPS).count();
            }
        }
        assert!(negative > 0);
        assert_eq!(cols.len(), negative.min(20));
        let mut last = f64::NEG_INFINITY;
        for c in &cols {
            let rc = reduced_cost(c, &duals);
            assert!(rc < -DEFAULT_EPS);
            let state = out.table.value(c.machine(), *c.seq().last().unwrap(), c.makespan() as usize);
            assert!((rc - state).abs() < 1e-7);
            assert!(rc >= last - 1e-9);
            last = rc;
        }
        assert!((reduced_cost(&cols[0], &duals) - out.min).abs() < 1e-9);
    }

    #[test]
    fn lanes_do_not_change_results() {
        let inst = generate(&GenConfig::standard(12, 5, 4)).unwrap();
        let duals = DualPrices::new((1..=12).map(|j| 40.0 + j as f64).collect(), vec![0.0, -3.0, 0.0, -1.0, 0.0]);
        let preds = PredecessorSets::unrestricted(&inst);
        let serial = Pricer::new(1).price(&inst, &preds, &duals, 250);
        for lanes in [2, 8, 16] {
            let par = Pricer::new(lanes).price(&inst, &preds, &duals, 250);
            assert_eq!(par, serial);
        }
    }

    #[test]
    fn forced_arc_shapes_predecessors() {
        let mut cfg = GenConfig::standard(4, 2, 8);
        cfg.eligibility = 1.0;
        let inst = generate(&cfg).unwrap();
        let cons = NodeConstraints::default().with_forced(Edge::new(0, 1, 2));
        let preds = PredecessorSets::derive(&inst, &cons);
        assert_eq!(preds.preds(0, 2), Some(&[1][..]));
        assert!(!preds.preds(0, 3).unwrap().contains(&1));
        assert!(!preds.can_end(0, 1));
        assert!(preds.can_end(0, 2));
        assert_eq!(preds.jobs(1), &[3, 4]);

        let start = NodeConstraints::default().with_forbidden(Edge::new(0, 0, 2));
        let preds = PredecessorSets::derive(&inst, &start);
        assert!(!preds.preds(0, 2).unwrap().contains(&0));
        assert!(preds.preds(1, 2).unwrap().contains(&0));

        let contradiction = NodeConstraints::default()
            .with_forced(Edge::new(0, 1, 2))
            .with_forbidden(Edge::new(0, 1, 2));
        let preds = PredecessorSets::derive(&inst, &contradiction);
        assert_eq!(preds.preds(0, 2), Some(&[][..]));
    }
}
