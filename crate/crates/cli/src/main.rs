use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use bnpsched::{
    brute_force, gap_lb, gap_sched, generate, sched, solve_dfs, solve_dfs_pool, verify, GenConfig, Instance,
    SearchError, SearchParams, SearchResult,
};
use bnpsched_cli::bench::{runtimes_dat, speedup_dat, speedups, summarize};
use bnpsched_cli::record::{append_records, read_records, write_records};
use bnpsched_cli::{instance_name, parse_sizes, seed_from_name, RunRecord};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

#[derive(Parser)]
#[command(name = "bnpsched", version, about = "Branch-and-price scheduling on unrelated parallel machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded random instances as JSON files.
    Generate {
        /// Comma-separated `n/m` sizes; `300/30..300/300` expands to a ladder.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve instance files and emit one CSV row per algorithm run.
    Solve {
        /// Instance file or a directory of them.
        #[arg(long, required = true)]
        instance: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Algo::Both)]
        algo: Algo,
        /// Width of the machine-indexed loops.
        #[arg(long, default_value_t = 1)]
        lanes: usize,
        /// Node workers; 0 runs the serial search.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        int_tol: Option<f64>,
        #[arg(long)]
        node_budget: Option<usize>,
        /// Seconds.
        #[arg(long)]
        time_budget: Option<f64>,
        /// CSV file to append to; rows go to stdout otherwise.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Aggregate result CSVs into summary tables and plot data.
    Bench {
        #[arg(long, required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Dfs,
    Sched,
    Both,
    Oracle,
}

/// Exit status 2: a search budget ran out.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct BudgetExhausted(String);

/// Exit status 3: a result failed its own consistency checks.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InvariantViolated(String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BNPSCHED_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Generate { sizes, count, seed, out } => cmd_generate(&sizes, count, seed, &out),
        Command::Solve {
            instance,
            algo,
            lanes,
            workers,
            eps,
            int_tol,
            node_budget,
            time_budget,
            results,
        } => {
            let mut params = SearchParams {
                lanes: lanes.max(1),
                ..SearchParams::default()
            };
            if let Some(eps) = eps {
                params.colgen.eps = eps;
            }
            if let Some(tol) = int_tol {
                params.int_tol = tol;
            }
            if let Some(budget) = node_budget {
                params.node_budget = budget;
            }
            if let Some(secs) = time_budget {
                match Duration::try_from_secs_f64(secs) {
                    Ok(d) => params.time_budget = Some(d),
                    Err(_) => {
                        eprintln!("error: --time-budget must be a nonnegative number of seconds");
                        return ExitCode::from(1);
                    }
                }
            }
            cmd_solve(&instance, algo, workers, &params, results.as_deref())
        }
        Command::Bench { results, out } => cmd_bench(&results, &out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.is::<BudgetExhausted>() {
                2
            } else if e.is::<InvariantViolated>() {
                3
            } else {
                1
            };
            ExitCode::from(code)
        }
    }
}

fn cmd_generate(sizes: &str, count: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    let sizes = parse_sizes(sizes).map_err(anyhow::Error::msg)?;
    if count == 0 {
        bail!("--count must be at least 1");
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut next = seed;
    for (n, m) in sizes {
        for index in 0..count {
            let inst = generate(&GenConfig::standard(n, m, next))?;
            let path = out.join(format!("{}.json", instance_name(n, m, index, next)));
            inst.save(&path).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {}", path.display());
            next = next.wrapping_add(1);
        }
    }
    Ok(())
}

fn instance_files(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .with_context(|| format!("reading {}", path.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            found.retain(|p| p.extension().is_some_and(|e| e == "json"));
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    if files.is_empty() {
        bail!("no instance files found");
    }
    Ok(files)
}

fn cmd_solve(
    paths: &[PathBuf],
    algo: Algo,
    workers: usize,
    params: &SearchParams,
    results: Option<&Path>,
) -> anyhow::Result<()> {
    let mut rows = Vec::new();
    let mut failure: Option<anyhow::Error> = None;
    for path in instance_files(paths)? {
        let inst = Instance::load(&path).with_context(|| format!("loading {}", path.display()))?;
        let id = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        match solve_one(&inst, &id, algo, workers, params, &mut rows) {
            Ok(()) => {}
            Err(e) if e.is::<BudgetExhausted>() || e.is::<InvariantViolated>() => {
                failure.get_or_insert(e);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    match results {
        Some(path) => append_records(path, &rows).with_context(|| format!("writing {}", path.display()))?,
        None => write_records(std::io::stdout().lock(), &rows, true)?,
    }
    failure.map_or(Ok(()), Err)
}

fn base_record(inst: &Instance, id: &str, algorithm: &str, strategy: &str) -> RunRecord {
    RunRecord {
        instance: id.to_string(),
        n: inst.num_jobs(),
        m: inst.num_machines(),
        seed: seed_from_name(id),
        algorithm: algorithm.into(),
        objective: None,
        lower_bound: None,
        gap_lb_pct: None,
        gap_sched_pct: None,
        nodes: 0,
        columns: 0,
        wall_ms: 0.0,
        lanes: 1,
        workers: 0,
        strategy: strategy.into(),
        status: "ok".into(),
        serial_ms: 0.0,
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Appends the rows for one instance. Budget and invariant failures still
/// leave a tagged row behind.
fn solve_one(
    inst: &Instance,
    id: &str,
    algo: Algo,
    workers: usize,
    params: &SearchParams,
    rows: &mut Vec<RunRecord>,
) -> anyhow::Result<()> {
    let started = Instant::now();
    let greedy = sched(inst);
    let greedy_ms = ms(started.elapsed());
    let z_sched = greedy.objective();
    if verify(inst, &greedy).is_err() {
        bail!(InvariantViolated(format!("{id}: SCHED produced an infeasible schedule")));
    }
    if matches!(algo, Algo::Sched | Algo::Both) {
        rows.push(RunRecord {
            objective: Some(z_sched),
            gap_sched_pct: Some(0.0),
            wall_ms: greedy_ms,
            serial_ms: greedy_ms,
            ..base_record(inst, id, "sched", "greedy")
        });
    }
    if algo == Algo::Oracle {
        let started = Instant::now();
        let (opt, _) = brute_force(inst).map_err(anyhow::Error::msg)?;
        let wall = ms(started.elapsed());
        rows.push(RunRecord {
            objective: Some(opt),
            lower_bound: Some(opt as f64),
            gap_lb_pct: Some(0.0),
            gap_sched_pct: Some(gap_sched(z_sched as f64, opt as f64)?),
            wall_ms: wall,
            serial_ms: wall,
            ..base_record(inst, id, "oracle", "exhaustive")
        });
    }
    if matches!(algo, Algo::Dfs | Algo::Both) {
        let strategy = if workers == 0 { "serial" } else { "pool" };
        let base = RunRecord {
            lanes: params.lanes,
            workers,
            ..base_record(inst, id, "dfs", strategy)
        };
        let started = Instant::now();
        let outcome = if workers == 0 {
            solve_dfs(inst, params)
        } else {
            solve_dfs_pool(inst, workers, params)
        };
        match outcome {
            Ok(res) => rows.push(dfs_record(inst, id, base, &res, z_sched)?),
            Err(e) => {
                let (status, nodes, lb) = match &e {
                    SearchError::NodeBudget { nodes, lower_bound, .. } => ("node-budget", *nodes, Some(*lower_bound)),
                    SearchError::TimeBudget { nodes, lower_bound, .. } => ("time-budget", *nodes, Some(*lower_bound)),
                    _ => ("error", 0, None),
                };
                let wall = ms(started.elapsed());
                rows.push(RunRecord {
                    status: status.into(),
                    nodes,
                    lower_bound: lb,
                    wall_ms: wall,
                    serial_ms: wall,
                    ..base
                });
                if e.is_budget() {
                    bail!(BudgetExhausted(format!("{id}: {e}")));
                }
                if matches!(e, SearchError::Invariant(_)) {
                    bail!(InvariantViolated(format!("{id}: {e}")));
                }
                return Err(anyhow::Error::new(e).context(format!("solving {id}")));
            }
        }
    }
    Ok(())
}

fn dfs_record(inst: &Instance, id: &str, base: RunRecord, res: &SearchResult, z_sched: u64) -> anyhow::Result<RunRecord> {
    if verify(inst, &res.incumbent) != Ok(res.objective) {
        bail!(InvariantViolated(format!("{id}: incumbent fails verification")));
    }
    if res.lower_bound > res.objective as f64 + 1e-6 {
        bail!(InvariantViolated(format!("{id}: lower bound {} above objective {}", res.lower_bound, res.objective)));
    }
    let z = res.objective as f64;
    Ok(RunRecord {
        objective: Some(res.objective),
        lower_bound: Some(res.lower_bound),
        gap_lb_pct: gap_lb(z, res.lower_bound).ok(),
        gap_sched_pct: Some(gap_sched(z_sched as f64, z)?),
        nodes: res.nodes_explored,
        columns: res.columns_generated,
        wall_ms: ms(res.wall),
        serial_ms: ms(res.serial_time()),
        ..base
    })
}

fn cmd_bench(paths: &[PathBuf], out: &Path) -> anyhow::Result<()> {
    let mut records = Vec::new();
    for path in paths {
        records.extend(read_records(path).with_context(|| format!("reading {}", path.display()))?);
    }
    let summary = summarize(&records)?;
    let speed = speedups(&records);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    for s in &summary {
        w.serialize(s)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out.join("speedup.csv"))?;
    for s in &speed {
        w.serialize(s)?;
    }
    w.flush()?;
    std::fs::write(out.join("runtimes.dat"), runtimes_dat(&summary))?;
    std::fs::write(out.join("speedup.dat"), speedup_dat(&speed))?;

    println!("{:>5} {:>5} {:>4} {:>10} {:>13} {:>12} {:>12}", "n", "m", "runs", "gap_lb %", "gap_sched %", "dfs ms", "sched ms");
    for s in &summary {
        println!(
            "{:>5} {:>5} {:>4} {:>10.3} {:>13.3} {:>12.1} {:>12.3}",
            s.n, s.m, s.instances, s.gap_lb_pct, s.gap_sched_pct, s.dfs_wall_ms, s.sched_wall_ms
        );
    }
    if !speed.is_empty() {
        println!();
        println!("{:>5} {:>5} {:>5} {:>7} {:>11} {:>9} {:>7}", "n", "m", "lanes", "workers", "theoretical", "observed", "limit");
        for r in &speed {
            println!(
                "{:>5} {:>5} {:>5} {:>7} {:>11.2} {:>9.2} {:>7.2}",
                r.n, r.m, r.lanes, r.workers, r.theoretical, r.observed, r.limit
            );
        }
    }
    Ok(())
}
