//! Reference algorithms: the SCHED greedy list heuristic and an exhaustive
//! optimum for small instances.

use itertools::Itertools;
use thiserror::Error;

use crate::column::{evaluate, FullSolution};
use crate::instance::{Instance, JobId, MachineId};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 9;

/// Greedy list scheduling: repeatedly append the eligible (job, machine)
/// pair whose new completion time divided by the job weight is smallest.
/// Ties go to the smaller job, then the smaller machine.
pub fn sched(inst: &Instance) -> FullSolution {
    let m = inst.num_machines();
    let mut clock = vec![0u64; m];
    let mut last: Vec<JobId> = vec![0; m];
    let mut lists: Vec<Vec<JobId>> = vec![Vec::new(); m];
    let mut remaining: Vec<JobId> = inst.jobs().collect();

    while !remaining.is_empty() {
        // (position in remaining, machine, completion, weight)
        let mut best: Option<(usize, MachineId, u64, u64)> = None;
        for (pos, &j) in remaining.iter().enumerate() {
            let w = u64::from(inst.weight(j));
            for k in inst.machines().filter(|&k| inst.is_eligible(k, j)) {
                let done = clock[k] + u64::from(inst.setup(k, last[k], j)) + u64::from(inst.processing(k, j));
                // done / w < best_done / best_w, compared exactly
                let better = best.map_or(true, |(_, _, bd, bw)| done * bw < bd * w);
                if better {
                    best = Some((pos, k, done, w));
                }
            }
        }
        let (pos, k, done, _) = best.expect("every job has an eligible machine");
        let j = remaining.remove(pos);
        clock[k] = done;
        last[k] = j;
        lists[k].push(j);
    }

    FullSolution::new(
        lists
            .iter()
            .enumerate()
            .map(|(k, seq)| evaluate(inst, k, seq).expect("sched respects eligibility"))
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("exhaustive search refused: {n} jobs exceeds the cap of {cap}")]
pub struct TooLarge {
    pub n: usize,
    pub cap: usize,
}

pub fn brute_force(inst: &Instance) -> Result<(u64, FullSolution), TooLarge> {
    brute_force_capped(inst, DEFAULT_BRUTE_FORCE_CAP)
}

/// Exact optimum by enumerating every assignment of jobs to eligible
/// machines and every ordering on each machine.
pub fn brute_force_capped(inst: &Instance, cap: usize) -> Result<(u64, FullSolution), TooLarge> {
    let (n, m) = (inst.num_jobs(), inst.num_machines());
    if n > cap {
        return Err(TooLarge { n, cap });
    }
    let subsets = 1usize << n;

    // best ordering of every eligible subset on every machine
    let mut best: Vec<Vec<Option<(u64, Vec<JobId>)>>> = vec![vec![None; subsets]; m];
    for (k, table) in best.iter_mut().enumerate() {
        for (mask, slot) in table.iter_mut().enumerate() {
            let jobs: Vec<JobId> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            if jobs.iter().any(|&j| !inst.is_eligible(k, j)) {
                continue;
            }
            let mut champion: Option<(u64, Vec<JobId>)> = None;
            for order in jobs.iter().copied().permutations(jobs.len()) {
                let cost = sequence_cost(inst, k, &order);
                if champion.as_ref().map_or(true, |(c, _)| cost < *c) {
                    champion = Some((cost, order));
                }
            }
            *slot = champion;
        }
    }

    let mut masks = vec![0usize; m];
    let mut incumbent: Option<(u64, Vec<usize>)> = None;
    assign(inst, &best, 1, &mut masks, &mut incumbent);
    let (opt, masks) = incumbent.expect("valid instances admit an assignment");
    let columns = masks
        .iter()
        .enumerate()
        .map(|(k, &mask)| {
            let seq = &best[k][mask].as_ref().expect("chosen subsets are feasible").1;
            evaluate(inst, k, seq).expect("eligible by construction")
        })
        .collect();
    Ok((opt, FullSolution::new(columns)))
}

fn sequence_cost(inst: &Instance, k: MachineId, order: &[JobId]) -> u64 {
    let mut clock = 0u64;
    let mut prev = 0;
    let mut cost = 0u64;
    for &j in order {
        clock += u64::from(inst.setup(k, prev, j)) + u64::from(inst.processing(k, j));
        cost += u64::from(inst.weight(j)) * clock;
        prev = j;
    }
    cost
}

fn assign(
    inst: &Instance,
    best: &[Vec<Option<(u64, Vec<JobId>)>>],
    job: JobId,
    masks: &mut [usize],
    incumbent: &mut Option<(u64, Vec<usize>)>,
) {
    if job > inst.num_jobs() {
        let total: u64 = masks
            .iter()
            .enumerate()
            .map(|(k, &mask)| best[k][mask].as_ref().map_or(0, |(c, _)| *c))
            .sum();
        if incumbent.as_ref().map_or(true, |(c, _)| total < *c) {
            *incumbent = Some((total, masks.to_vec()));
        }
        return;
    }
    for k in inst.machines().filter(|&k| inst.is_eligible(k, job)) {
        masks[k] |= 1 << (job - 1);
        assign(inst, best, job + 1, masks, incumbent);
        masks[k] &= !(1 << (job - 1));
    }
}
