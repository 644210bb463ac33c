//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines come out in order and unbuffered.
//! The exit status is nonzero when a criterion fails, except for the
//! speedup half of criterion 6 on hosts with fewer than six cores, where
//! the line still reads FAIL but the run is not failed on it.

mod common;

use std::time::{Duration, Instant};

use bnpsched::lp::{solve, LpStatus};
use bnpsched::metrics::{measure, RunTiming};
use bnpsched::{
    amdahl, amdahl_limit, brute_force, gap_lb, gap_sched, generate, horizon, price, sched, solve_dfs,
    solve_dfs_pool, verify, DualPrices, GenConfig, Instance, PredecessorSets, Pricer, SearchParams, SearchResult,
};
use common::{enumerate_min_reduced_cost, pricing_case, random_lp, vertex_optimum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    /// Failure the host cannot avoid; reported but not fatal.
    excused: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict {
            pass,
            excused: false,
            detail,
        }
    }
}

/// Marks `verdict` failed when `started` is older than `limit`.
fn within(mut verdict: Verdict, started: Instant, limit: Duration) -> Verdict {
    let took = started.elapsed();
    if took > limit {
        verdict.pass = false;
        verdict.detail += &format!("; took {:.0}s, limit {}s", took.as_secs_f64(), limit.as_secs());
    }
    verdict
}

fn report(id: u32, started: Instant, verdict: &Verdict) {
    let tag = if verdict.pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id}: {tag} [{:.1}s] {}",
        started.elapsed().as_secs_f64(),
        verdict.detail
    );
}

fn oracle_band() -> Verdict {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut proven = 0;
    let count = 200;
    for seed in 0..count {
        let n = 4 + (seed % 5) as usize;
        let m = 1 + (seed / 5 % 3) as usize;
        let inst = generate(&GenConfig {
            eligibility: 0.6,
            ..GenConfig::standard(n, m, seed)
        })
        .unwrap();
        let (opt, _) = brute_force(&inst).unwrap();
        let res = solve_dfs(&inst, &SearchParams::default()).unwrap();
        let valid = verify(&inst, &res.incumbent) == Ok(res.objective);
        if !(valid && res.lower_bound <= opt as f64 + 1e-6 && opt <= res.objective) {
            failures.push(format!("seed {seed}: LB {} OPT {opt} Z {}", res.lower_bound, res.objective));
        }
        proven += usize::from(res.objective == opt);
    }
    let verdict = Verdict::new(
        failures.is_empty(),
        format!(
            "{count} instances, {proven} solved to optimality, violations {:?}",
            failures
        ),
    );
    within(verdict, started, Duration::from_secs(600))
}

fn pricing_exactness() -> Verdict {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    let count = 500;
    for seed in 0..count {
        let (inst, duals, t) = pricing_case(seed);
        let dp = price(&inst, &PredecessorSets::unrestricted(&inst), &duals, t).min;
        let oracle = enumerate_min_reduced_cost(&inst, &duals, t);
        if dp.is_finite() || oracle.is_finite() {
            let err = (dp - oracle).abs();
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            mismatches += usize::from(!(err <= 1e-9));
        }
    }
    let verdict = Verdict::new(
        mismatches == 0,
        format!("{count} cases, {mismatches} mismatches, worst error {worst:.2e}"),
    );
    within(verdict, started, Duration::from_secs(300))
}

struct SizeRun {
    m: usize,
    results: Vec<SearchResult>,
    gap_lb: Vec<f64>,
    gap_sched: Vec<f64>,
    slowest: Duration,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn effectiveness_runs() -> Vec<SizeRun> {
    [10, 20, 50]
        .into_iter()
        .map(|m| {
            let mut run = SizeRun {
                m,
                results: Vec::new(),
                gap_lb: Vec::new(),
                gap_sched: Vec::new(),
                slowest: Duration::ZERO,
            };
            for seed in 0..10 {
                let inst = generate(&GenConfig::standard(100, m, seed)).unwrap();
                let res = solve_dfs(&inst, &SearchParams::default()).unwrap();
                let z = res.objective as f64;
                run.gap_lb.push(gap_lb(z, res.lower_bound).unwrap());
                run.gap_sched.push(gap_sched(sched(&inst).objective() as f64, z).unwrap());
                run.slowest = run.slowest.max(res.wall);
                println!(
                    "  n=100 m={m} seed {seed}: Z {} LB {:.2} nodes {} {:.1}s",
                    res.objective,
                    res.lower_bound,
                    res.nodes_explored,
                    res.wall.as_secs_f64()
                );
                run.results.push(res);
            }
            run
        })
        .collect()
}

fn effectiveness(runs: &[SizeRun], took: Duration) -> Verdict {
    let lb: Vec<f64> = runs.iter().map(|r| mean(&r.gap_lb)).collect();
    let gs: Vec<f64> = runs.iter().map(|r| mean(&r.gap_sched)).collect();
    // m = 10, 20, 50 is n/m decreasing, so the SCHED gap must decrease along it
    let pass = lb.iter().all(|&g| g <= 1.5) && gs.iter().all(|&g| g >= 0.0) && gs.windows(2).all(|w| w[0] > w[1]);
    let rows: Vec<String> = runs
        .iter()
        .zip(lb.iter().zip(&gs))
        .map(|(r, (l, s))| format!("n/m={}: gap_lb {l:.3}% gap_sched {s:.3}%", 100 / r.m))
        .collect();
    let limit = Duration::from_secs(1800);
    Verdict::new(
        pass && took <= limit,
        format!("{}; all 30 solves {:.0}s (limit {}s)", rows.join("; "), took.as_secs_f64(), limit.as_secs()),
    )
}

fn runtime_ceiling(runs: &[SizeRun]) -> Verdict {
    let slowest = runs.iter().map(|r| r.slowest).max().unwrap();
    Verdict::new(
        slowest <= Duration::from_secs(300),
        format!("slowest n=100 solve {:.1}s", slowest.as_secs_f64()),
    )
}

fn lp_correctness() -> Verdict {
    let (mut bad, mut infeasible, mut worst_gap) = (Vec::new(), 0, 0.0f64);
    let count = 300;
    for seed in 0..count {
        let lp = random_lp(seed);
        let sol = solve(&lp).unwrap();
        match vertex_optimum(&lp) {
            None => {
                infeasible += 1;
                if sol.status != LpStatus::Infeasible {
                    bad.push(seed);
                }
            }
            Some(opt) => {
                let gap = (sol.dual_objective(&lp) - sol.objective).abs();
                worst_gap = worst_gap.max(gap);
                if sol.status != LpStatus::Optimal || (sol.objective - opt).abs() > 1e-7 || gap > 1e-7 {
                    bad.push(seed);
                }
            }
        }
    }
    Verdict::new(
        bad.is_empty() && infeasible > 0,
        format!("{count} LPs, {infeasible} infeasible, worst duality gap {worst_gap:.1e}, failing seeds {bad:?}"),
    )
}

fn random_duals(inst: &Instance, seed: u64) -> DualPrices {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = inst.jobs().map(|_| rng.gen_range(0.0..2000.0)).collect();
    let sigma = inst.machines().map(|_| rng.gen_range(-500.0..=0.0)).collect();
    DualPrices::new(pi, sigma)
}

fn parallel_lanes() -> Verdict {
    let mut identical = true;
    for seed in 0..3 {
        let inst = generate(&GenConfig::standard(100, 48, seed)).unwrap();
        let preds = PredecessorSets::unrestricted(&inst);
        let duals = random_duals(&inst, seed);
        let t = horizon(&inst) as usize;
        let reference = Pricer::new(1).price(&inst, &preds, &duals, t);
        for lanes in [2, 4, 8] {
            identical &= Pricer::new(lanes).price(&inst, &preds, &duals, t) == reference;
        }
    }

    let instances: Vec<Instance> = (0..3)
        .map(|seed| generate(&GenConfig::standard(100, 48, seed)).unwrap())
        .collect();
    let mut timings = Vec::new();
    let mut reference: Option<Vec<(u64, Vec<usize>)>> = None;
    for lanes in [1, 2, 4, 6, 8] {
        let params = SearchParams {
            lanes,
            ..SearchParams::default()
        };
        let (mut wall, mut serial) = (Duration::ZERO, Duration::ZERO);
        let mut outcome = Vec::new();
        for inst in &instances {
            let res = solve_dfs(inst, &params).unwrap();
            wall += res.wall;
            serial += res.serial_time();
            outcome.push((res.objective, res.explored.clone()));
        }
        identical &= reference.get_or_insert_with(|| outcome.clone()) == &outcome;
        timings.push(RunTiming { lanes, wall, serial });
    }
    let records = measure(&timings).unwrap();
    println!("  lanes  theoretical  observed  (serial fraction {:.3})", records[0].serial_fraction);
    for r in &records {
        println!("  {:>5}  {:>11.2}  {:>8.2}", r.lanes, r.theoretical, r.observed);
    }
    let six = records.iter().find(|r| r.lanes == 6).unwrap();
    let fast_enough = six.observed >= 0.7 * six.theoretical;
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    Verdict {
        pass: identical && fast_enough,
        excused: identical && !fast_enough && cores < 6,
        detail: format!(
            "lanes 1/2/4/8 identical: {identical}; 6-lane speedup {:.2} vs 70% of {:.2} on {cores} core(s)",
            six.observed, six.theoretical
        ),
    }
}

fn node_inflation(serial: &SizeRun) -> Verdict {
    assert_eq!(serial.m, 20);
    let params = SearchParams::default();
    let (mut one, mut three) = (Vec::new(), Vec::new());
    let mut same_order = true;
    for (seed, res) in serial.results.iter().enumerate() {
        let inst = generate(&GenConfig::standard(100, 20, seed as u64)).unwrap();
        let single = solve_dfs_pool(&inst, 1, &params).unwrap();
        same_order &= single.explored == res.explored;
        one.push(single.nodes_explored as f64);
        three.push(solve_dfs_pool(&inst, 3, &params).unwrap().nodes_explored as f64);
    }
    let (a, b) = (mean(&one), mean(&three));
    Verdict::new(
        same_order && b >= a,
        format!("mean nodes 1 worker {a:.1}, 3 workers {b:.1}; 1 worker matches serial order: {same_order}"),
    )
}

fn metric_identities() -> Verdict {
    let s = 1.0 / 12.28;
    let k12 = amdahl(s, 12).unwrap();
    let limit = amdahl_limit(s).unwrap();
    let gaps = gap_lb(500.0, 500.0) == Ok(0.0)
        && gap_sched(500.0, 500.0) == Ok(0.0)
        && gap_lb(510.0, 500.0).unwrap() > 0.0
        && gap_sched(500.0, 490.0).unwrap() > 0.0
        && (1..=64).all(|k| amdahl(1.0, k) == Ok(1.0) && (amdahl(0.0, k).unwrap() - k as f64).abs() <= 1e-12);
    Verdict::new(
        (k12 - 6.33).abs() <= 0.01 && (limit - 12.28).abs() <= 0.01 && gaps,
        format!("amdahl(1/12.28, 12) = {k12:.4}, limit {limit:.4}, gap identities hold: {gaps}"),
    )
}

fn main() {
    let mut fatal = 0;
    let mut run = |id: u32, f: &mut dyn FnMut() -> Verdict| {
        let started = Instant::now();
        let verdict = f();
        report(id, started, &verdict);
        if !verdict.pass && !verdict.excused {
            fatal += 1;
        }
    };
    run(1, &mut oracle_band);
    run(2, &mut pricing_exactness);
    let started = Instant::now();
    let runs = effectiveness_runs();
    let took = started.elapsed();
    run(3, &mut || effectiveness(&runs, took));
    run(4, &mut || runtime_ceiling(&runs));
    run(5, &mut lp_correctness);
    run(6, &mut parallel_lanes);
    run(7, &mut || node_inflation(&runs[1]));
    run(8, &mut metric_identities);
    if fatal > 0 {
        println!("{fatal} criterion(s) failed");
        std::process::exit(1);
    }
}
