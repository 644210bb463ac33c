//! Lazy depth-first branch-and-price.
//!
//! A node's relaxation is solved when the node is selected; if it is
//! fractional, the node is split on the arc flow `X_ij^k` closest to 0.5
//! and both children join the active list. The deepest active node is
//! always explored next, and the search stops at the first node whose
//! relaxation is integral.
//!
//! [`solve_dfs`] runs the whole search on the calling thread.
//! [`solve_dfs_pool`] keeps the active list on a master thread and hands
//! nodes to worker threads one at a time.

mod constraints;
mod pool;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};
use thiserror::Error;

use crate::baseline::sched;
use crate::colgen::{solve_relaxation, ColGenError, ColGenParams, PhaseTimes, RelaxationResult, RelaxationStatus};
use crate::column::{evaluate, satisfies, verify, Column, FullSolution};
use crate::instance::{horizon, Instance, JobId};
use crate::pricing::Pricer;

pub use constraints::{Edge, NodeConstraints};
pub use pool::{solve_dfs_pool, solve_dfs_pool_observed};

pub const DEFAULT_INT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchParams {
    pub colgen: ColGenParams,
    pub int_tol: f64,
    pub node_budget: usize,
    pub time_budget: Option<Duration>,
    /// Width of the machine-indexed pricing and branching loops.
    pub lanes: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            colgen: ColGenParams::default(),
            int_tol: DEFAULT_INT_TOL,
            node_budget: 1_000_000,
            time_budget: None,
            lanes: 1,
        }
    }
}

/// A node of the search tree.
#[derive(Clone, Debug)]
pub struct Node {
    pub id: usize,
    pub depth: usize,
    pub constraints: NodeConstraints,
    /// Columns used to warm-start the node's restricted master.
    pub pool: Vec<Arc<Column>>,
    /// Relaxation objective of the parent (`−∞` for the root).
    pub bound: f64,
}

impl Node {
    pub fn root(pool: Vec<Arc<Column>>) -> Self {
        Node {
            id: 0,
            depth: 0,
            constraints: NodeConstraints::default(),
            pool,
            bound: f64::NEG_INFINITY,
        }
    }
}

/// Arc flows `X_ij^k = Σ_ω δ_ijω · x_ω` of a master solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl FlowMatrix {
    fn offset(&self, machine: usize, pred: JobId, succ: JobId) -> usize {
        (machine * (self.n + 1) + pred) * self.n + succ - 1
    }

    /// Flow on `pred → succ` on `machine`; `pred` in `0..=n`, `succ` in `1..=n`.
    pub fn get(&self, machine: usize, pred: JobId, succ: JobId) -> f64 {
        self.values[self.offset(machine, pred, succ)]
    }

    /// Entries in lexicographic `(k, i, j)` order.
    pub fn entries(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        let n = self.n;
        (0..self.m).flat_map(move |k| {
            (0..=n).flat_map(move |i| (1..=n).map(move |j| (Edge::new(k, i, j), self.get(k, i, j))))
        })
    }
}

/// Accumulates arc flows machine by machine across the pricer's lanes.
pub fn flows(inst: &Instance, pool: &[Arc<Column>], x: &[f64], pricer: &Pricer) -> FlowMatrix {
    let (n, m) = (inst.num_jobs(), inst.num_machines());
    let mut by_machine: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (v, col) in pool.iter().enumerate() {
        if x[v] != 0.0 {
            by_machine[col.machine()].push(v);
        }
    }
    let blocks = pricer.map_machines(m, |k| {
        let mut block = vec![0.0; (n + 1) * n];
        for &v in &by_machine[k] {
            for &(i, j, d) in pool[v].arc_entries() {
                block[i * n + j - 1] += f64::from(d) * x[v];
            }
        }
        block
    });
    FlowMatrix {
        n,
        m,
        values: blocks.concat(),
    }
}

fn fractionality(v: f64) -> f64 {
    (v - v.floor()).min(v.ceil() - v)
}

/// The fractional arc whose flow is closest to 0.5; ties go to the
/// lexicographically smallest `(k, i, j)`.
pub fn select_edge(flows: &FlowMatrix, int_tol: f64) -> Option<Edge> {
    let mut best: Option<(Edge, f64)> = None;
    for (edge, v) in flows.entries() {
        if fractionality(v) > int_tol {
            let dist = (v - 0.5).abs();
            if best.map_or(true, |(_, d)| dist < d - 1e-12) {
                best = Some((edge, dist));
            }
        }
    }
    best.map(|(e, _)| e)
}

pub fn is_integer(x: &[f64], int_tol: f64) -> bool {
    x.iter().all(|&v| v.abs() <= int_tol || (v - 1.0).abs() <= int_tol)
}

/// Splits `node` on `arc` into the child that forces it and the child that
/// forbids it. Both inherit the parent's pool minus the columns their
/// constraints exclude, and take `objective` as their bound.
pub fn branch(node: &Node, arc: Edge, objective: f64, next_id: &mut usize) -> (Node, Node) {
    debug_assert!(!node.constraints.is_constrained(&arc));
    let mut child = |constraints: NodeConstraints| {
        let pool = node.pool.iter().filter(|c| satisfies(c, &constraints)).cloned().collect();
        let id = *next_id;
        *next_id += 1;
        Node {
            id,
            depth: node.depth + 1,
            constraints,
            pool,
            bound: objective,
        }
    };
    let force = child(node.constraints.clone().with_forced(arc));
    let forbid = child(node.constraints.clone().with_forbidden(arc));
    (force, forbid)
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub incumbent: FullSolution,
    /// Objective of the incumbent.
    pub objective: u64,
    /// Least bound over the active list at termination, capped by the
    /// incumbent objective.
    pub lower_bound: f64,
    pub root_bound: f64,
    /// True when the incumbent is proven optimal (root integral or no
    /// active nodes left).
    pub proven_optimal: bool,
    pub nodes_explored: usize,
    pub columns_generated: usize,
    pub wall: Duration,
    pub timing: PhaseTimes,
    /// Ids of explored nodes in exploration order, root first.
    pub explored: Vec<usize>,
    pub horizon: usize,
}

impl SearchResult {
    /// Wall time outside the pricing and branching loops.
    pub fn serial_time(&self) -> Duration {
        self.wall.saturating_sub(self.timing.parallelizable())
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("node budget of {budget} exhausted after {nodes} nodes; best lower bound {lower_bound}")]
    NodeBudget {
        budget: usize,
        nodes: usize,
        lower_bound: f64,
    },
    #[error("time budget of {budget:?} exhausted after {nodes} nodes; best lower bound {lower_bound}")]
    TimeBudget {
        budget: Duration,
        nodes: usize,
        lower_bound: f64,
    },
    #[error("root relaxation is infeasible")]
    RootInfeasible,
    #[error("active list emptied after {nodes} nodes without an integral relaxation")]
    Exhausted { nodes: usize },
    #[error("column generation failed: {0}")]
    ColGen(#[from] ColGenError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl SearchError {
    pub fn is_budget(&self) -> bool {
        matches!(self, SearchError::NodeBudget { .. } | SearchError::TimeBudget { .. })
    }
}

struct Active(Node, u64);

impl PartialEq for Active {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Active {}
impl PartialOrd for Active {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Active {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.0.depth, self.1).cmp(&(other.0.depth, other.1))
    }
}

/// Active nodes; the deepest, most recently pushed node comes out first.
#[derive(Default)]
struct Frontier {
    heap: BinaryHeap<Active>,
    pushed: u64,
}

impl Frontier {
    fn push(&mut self, node: Node) {
        self.pushed += 1;
        self.heap.push(Active(node, self.pushed));
    }

    /// Pushes the forbid child first so the force child is explored first.
    fn push_children(&mut self, (force, forbid): (Node, Node)) {
        self.push(forbid);
        self.push(force);
    }

    fn pop(&mut self) -> Option<Node> {
        self.heap.pop().map(|a| a.0)
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn min_bound(&self) -> f64 {
        self.heap.iter().map(|a| a.0.bound).fold(f64::INFINITY, f64::min)
    }

    fn max_depth(&self) -> Option<usize> {
        self.heap.peek().map(|a| a.0.depth)
    }

    fn constraints(&self) -> Vec<&NodeConstraints> {
        self.heap.iter().map(|a| &a.0.constraints).collect()
    }
}

/// What a solved node turns into.
enum NodeOutcome {
    Infeasible,
    Integral(FullSolution),
    Branched(Node, Node),
}

/// Tree state owned by whoever drives the search (the caller in serial
/// mode, the master in pool mode).
struct Search<'a> {
    inst: &'a Instance,
    horizon: usize,
    params: &'a SearchParams,
    pricer: Pricer,
    frontier: Frontier,
    next_id: usize,
    nodes_explored: usize,
    columns_generated: usize,
    timing: PhaseTimes,
    explored: Vec<usize>,
    root_bound: f64,
    started: Instant,
}

/// How the root step ended.
enum RootStep {
    Done(SearchResult),
    Continue,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, params: &'a SearchParams) -> Self {
        Search {
            inst,
            horizon: horizon(inst) as usize,
            params,
            pricer: Pricer::new(params.lanes),
            frontier: Frontier::default(),
            next_id: 1,
            nodes_explored: 0,
            columns_generated: 0,
            timing: PhaseTimes::default(),
            explored: Vec::new(),
            root_bound: f64::NEG_INFINITY,
            started: Instant::now(),
        }
    }

    fn relax(&self, node: &Node, pricer: &Pricer) -> Result<RelaxationResult, ColGenError> {
        solve_relaxation(
            self.inst,
            self.horizon,
            &node.constraints,
            node.pool.clone(),
            pricer,
            &self.params.colgen,
        )
    }

    fn root(&mut self) -> Result<RootStep, SearchError> {
        let root = Node::root(root_pool(self.inst));
        self.nodes_explored += 1;
        self.explored.push(root.id);
        let relax = self.relax(&root, &self.pricer)?;
        if relax.status == RelaxationStatus::Infeasible {
            return Err(SearchError::RootInfeasible);
        }
        self.root_bound = relax.objective;
        info!(
            "root relaxation {:.3} ({} master solves, {} columns)",
            relax.objective, relax.iterations, relax.columns_generated
        );
        match self.resolve(root, relax)? {
            NodeOutcome::Integral(sol) => Ok(RootStep::Done(self.finish(sol)?)),
            NodeOutcome::Branched(force, forbid) => {
                self.frontier.push_children((force, forbid));
                Ok(RootStep::Continue)
            }
            NodeOutcome::Infeasible => Err(SearchError::RootInfeasible),
        }
    }

    fn check_budgets(&self) -> Result<(), SearchError> {
        let lower_bound = self.frontier.min_bound();
        if self.nodes_explored >= self.params.node_budget {
            return Err(SearchError::NodeBudget {
                budget: self.params.node_budget,
                nodes: self.nodes_explored,
                lower_bound,
            });
        }
        if let Some(budget) = self.params.time_budget {
            if self.started.elapsed() > budget {
                return Err(SearchError::TimeBudget {
                    budget,
                    nodes: self.nodes_explored,
                    lower_bound,
                });
            }
        }
        Ok(())
    }

    /// Pops the next node to explore and records it as explored.
    fn select(&mut self) -> Option<Node> {
        let node = self.frontier.pop()?;
        self.nodes_explored += 1;
        self.explored.push(node.id);
        debug!("exploring node {} at depth {} (bound {:.3})", node.id, node.depth, node.bound);
        Some(node)
    }

    fn resolve(&mut self, mut node: Node, relax: RelaxationResult) -> Result<NodeOutcome, SearchError> {
        self.columns_generated += relax.columns_generated;
        self.timing.add(&relax.timing);
        if relax.status == RelaxationStatus::Infeasible {
            debug!("node {} infeasible", node.id);
            return Ok(NodeOutcome::Infeasible);
        }
        let tol = self.params.int_tol;
        if is_integer(&relax.x, tol) {
            let columns = relax
                .pool
                .iter()
                .zip(&relax.x)
                .filter(|&(_, &v)| v > 0.5)
                .map(|(c, _)| Column::clone(c))
                .collect();
            let sol = FullSolution::new(columns);
            return match verify(self.inst, &sol) {
                Ok(_) => Ok(NodeOutcome::Integral(sol)),
                Err(v) => Err(SearchError::Invariant(format!(
                    "integral relaxation at node {} is not a valid schedule: {}",
                    node.id,
                    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
                ))),
            };
        }

        let started = Instant::now();
        let flow = flows(self.inst, &relax.pool, &relax.x, &self.pricer);
        let arc = select_edge(&flow, tol);
        self.timing.branching += started.elapsed();

        match arc {
            Some(arc) => {
                node.pool = relax.pool;
                let (force, forbid) = branch(&node, arc, relax.objective, &mut self.next_id);
                Ok(NodeOutcome::Branched(force, forbid))
            }
            None => {
                // fractional columns but integral arc flows: read off the paths
                let sol = decompose(self.inst, &flow, tol);
                match verify(self.inst, &sol) {
                    Ok(_) => Ok(NodeOutcome::Integral(sol)),
                    Err(v) => Err(SearchError::Invariant(format!(
                        "node {} has integral flows that do not decompose into a schedule: {}",
                        node.id,
                        v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
                    ))),
                }
            }
        }
    }

    fn finish(&self, incumbent: FullSolution) -> Result<SearchResult, SearchError> {
        let objective = verify(self.inst, &incumbent).map_err(|v| {
            SearchError::Invariant(format!("incumbent fails verification: {} violations", v.len()))
        })?;
        let lower_bound = self.frontier.min_bound().min(objective as f64);
        Ok(SearchResult {
            objective,
            lower_bound,
            root_bound: self.root_bound,
            proven_optimal: self.frontier.is_empty() || self.nodes_explored == 1,
            incumbent,
            nodes_explored: self.nodes_explored,
            columns_generated: self.columns_generated,
            wall: self.started.elapsed(),
            timing: self.timing,
            explored: self.explored.clone(),
            horizon: self.horizon,
        })
    }
}

fn decompose(inst: &Instance, flow: &FlowMatrix, tol: f64) -> FullSolution {
    let columns = inst
        .machines()
        .filter_map(|k| {
            let mut seq = Vec::new();
            let mut visited = vec![false; inst.num_jobs() + 1];
            let mut cur = 0;
            while let Some(next) = inst.jobs().find(|&j| !visited[j] && flow.get(k, cur, j) >= 1.0 - tol) {
                visited[next] = true;
                seq.push(next);
                cur = next;
            }
            evaluate(inst, k, &seq).ok()
        })
        .collect();
    FullSolution::new(columns)
}

/// Serial lazy depth-first branch-and-price.
/// The SCHED schedule plus every single-job schedule. Without the
/// singletons most coverage rows start with a basic artificial, which pins
/// their duals to the big-M penalty and makes pricing return schedules that
/// repeat a few jobs as often as the horizon allows.
fn root_pool(inst: &Instance) -> Vec<Arc<Column>> {
    let mut pool: Vec<Arc<Column>> = sched(inst).columns().iter().cloned().map(Arc::new).collect();
    for k in inst.machines() {
        for j in inst.eligible_jobs(k) {
            let single = evaluate(inst, k, &[j]).expect("eligible job");
            if !pool.iter().any(|c| **c == single) {
                pool.push(Arc::new(single));
            }
        }
    }
    pool
}

pub fn solve_dfs(inst: &Instance, params: &SearchParams) -> Result<SearchResult, SearchError> {
    solve_dfs_observed(inst, params, |_| {})
}

/// [`solve_dfs`] that shows `observer` the constraints of every active node
/// each time a node is about to be selected.
pub fn solve_dfs_observed(
    inst: &Instance,
    params: &SearchParams,
    mut observer: impl FnMut(&[&NodeConstraints]),
) -> Result<SearchResult, SearchError> {
    let mut search = Search::new(inst, params);
    if let RootStep::Done(result) = search.root()? {
        return Ok(result);
    }
    loop {
        observer(&search.frontier.constraints());
        search.check_budgets()?;
        let depth = search.frontier.max_depth();
        let Some(node) = search.select() else {
            return Err(SearchError::Exhausted {
                nodes: search.nodes_explored,
            });
        };
        debug_assert_eq!(Some(node.depth), depth);
        let relax = search.relax(&node, &search.pricer)?;
        match search.resolve(node, relax)? {
            NodeOutcome::Infeasible => {}
            NodeOutcome::Integral(sol) => return search.finish(sol),
            NodeOutcome::Branched(force, forbid) => search.frontier.push_children((force, forbid)),
        }
    }
}
