//! Master/worker node exploration.
//!
//! The master owns the active list, does all branching and selection, and
//! solves the root. Workers receive one node at a time, solve its
//! relaxation, and send the node back with the result. Nothing else is
//! shared between them. With a single worker the exploration order is the
//! serial one.

use std::collections::VecDeque;
use std::sync::mpsc;
use std::thread;

use log::debug;

use super::{Node, NodeConstraints, NodeOutcome, RootStep, Search, SearchError, SearchParams, SearchResult};
use crate::colgen::{ColGenError, RelaxationResult};
use crate::instance::Instance;
use crate::pricing::Pricer;

struct Solved {
    worker: usize,
    node: Node,
    result: Result<RelaxationResult, ColGenError>,
}

pub fn solve_dfs_pool(inst: &Instance, workers: usize, params: &SearchParams) -> Result<SearchResult, SearchError> {
    solve_dfs_pool_observed(inst, workers, params, |_| {})
}

/// [`solve_dfs_pool`] that shows `observer` the active list each time the
/// master is about to dispatch a node.
pub fn solve_dfs_pool_observed(
    inst: &Instance,
    workers: usize,
    params: &SearchParams,
    mut observer: impl FnMut(&[&NodeConstraints]),
) -> Result<SearchResult, SearchError> {
    let workers = workers.max(1);
    let mut search = Search::new(inst, params);
    if let RootStep::Done(result) = search.root()? {
        return Ok(result);
    }
    let horizon = search.horizon;
    let colgen = params.colgen.clone();

    thread::scope(|scope| {
        let (results_tx, results_rx) = mpsc::channel::<Solved>();
        let mut task_txs = Vec::with_capacity(workers);
        for worker in 0..workers {
            let (task_tx, task_rx) = mpsc::channel::<Node>();
            task_txs.push(task_tx);
            let results_tx = results_tx.clone();
            let colgen = colgen.clone();
            let lanes = params.lanes;
            thread::Builder::new()
                .name(format!("bnp-worker-{worker}"))
                .spawn_scoped(scope, move || {
                    let pricer = Pricer::new(lanes);
                    for node in task_rx {
                        let result = crate::colgen::solve_relaxation(
                            inst,
                            horizon,
                            &node.constraints,
                            node.pool.clone(),
                            &pricer,
                            &colgen,
                        );
                        if results_tx.send(Solved { worker, node, result }).is_err() {
                            break;
                        }
                    }
                })
                .expect("failed to spawn worker");
        }
        drop(results_tx);

        let mut idle: VecDeque<usize> = (0..workers).collect();
        let mut outstanding = 0usize;
        // dropping task_txs on return closes every worker's queue
        loop {
            while !idle.is_empty() && !search.frontier.is_empty() {
                observer(&search.frontier.constraints());
                search.check_budgets()?;
                let node = search.select().expect("frontier is nonempty");
                let worker = idle.pop_front().expect("an idle worker exists");
                debug!("master sends node {} to worker {worker}", node.id);
                task_txs[worker]
                    .send(node)
                    .map_err(|_| SearchError::Invariant(format!("worker {worker} hung up")))?;
                outstanding += 1;
            }
            if outstanding == 0 {
                return Err(SearchError::Exhausted {
                    nodes: search.nodes_explored,
                });
            }
            let solved = results_rx
                .recv()
                .map_err(|_| SearchError::Invariant("all workers hung up".into()))?;
            outstanding -= 1;
            idle.push_back(solved.worker);
            match search.resolve(solved.node, solved.result?)? {
                NodeOutcome::Infeasible => {}
                NodeOutcome::Integral(sol) => return search.finish(sol),
                NodeOutcome::Branched(force, forbid) => search.frontier.push_children((force, forbid)),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::brute_force;
    use crate::column::verify;
    use crate::instance::{generate, GenConfig};
    use crate::tree::solve_dfs;

    #[test]
    fn single_worker_replays_serial_order() {
        for seed in 0..6 {
            let inst = generate(&GenConfig::standard(14, 3, seed)).unwrap();
            let serial = solve_dfs(&inst, &SearchParams::default()).unwrap();
            let pooled = solve_dfs_pool(&inst, 1, &SearchParams::default()).unwrap();
            assert_eq!(serial.explored, pooled.explored, "seed {seed}");
            assert_eq!(serial.objective, pooled.objective);
        }
    }

    #[test]
    fn several_workers_return_verified_incumbents() {
        for seed in 0..10 {
            let mut cfg = GenConfig::standard(7, 2, seed);
            cfg.eligibility = 0.7;
            let inst = generate(&cfg).unwrap();
            let (opt, _) = brute_force(&inst).unwrap();
            for workers in [2, 3] {
                let res = solve_dfs_pool(&inst, workers, &SearchParams::default()).unwrap();
                assert_eq!(verify(&inst, &res.incumbent), Ok(res.objective));
                assert!(res.lower_bound <= opt as f64 + 1e-6);
                assert!(opt <= res.objective);
            }
        }
    }
}
