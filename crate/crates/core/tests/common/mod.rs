//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use bnpsched::lp::{LpColumn, LpProblem, RowKind};
use bnpsched::{generate, DualPrices, GenConfig, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small instance with short jobs so that a horizon of at most 60 admits
/// several sequences per machine.
pub fn pricing_case(seed: u64) -> (Instance, DualPrices, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=2);
    let inst = generate(&GenConfig {
        n,
        m,
        processing: 8..=20,
        setup: 0..=5,
        weight: 1..=10,
        eligibility: 0.6,
        seed,
    })
    .unwrap();
    let pi = (0..n).map(|_| rng.gen_range(0.0..400.0)).collect();
    let sigma = (0..m).map(|_| rng.gen_range(-100.0..=0.0)).collect();
    let horizon = rng.gen_range(10..=60);
    (inst, DualPrices::new(pi, sigma), horizon)
}

/// Least reduced cost over every job sequence that ends by `horizon`,
/// found by exhaustive enumeration. Jobs may repeat, but not back to back.
pub fn enumerate_min_reduced_cost(inst: &Instance, duals: &DualPrices, horizon: usize) -> f64 {
    fn extend(inst: &Instance, duals: &DualPrices, k: usize, last: usize, t: usize, acc: f64, horizon: usize, best: &mut f64) {
        for j in inst.eligible_jobs(k).into_iter().filter(|&j| j != last) {
            let done = t + (inst.setup(k, last, j) + inst.processing(k, j)) as usize;
            if done <= horizon {
                let acc = acc + f64::from(inst.weight(j)) * done as f64 - duals.pi(j);
                *best = best.min(acc);
                extend(inst, duals, k, j, done, acc, horizon, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    for k in inst.machines() {
        extend(inst, duals, k, 0, 0, -duals.sigma(k), horizon, &mut best);
    }
    best
}

/// Random LP with small integer data and nonnegative costs, so it is
/// either infeasible or has a finite optimum.
pub fn random_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lp = LpProblem::new(1e6);
    let rows = rng.gen_range(1..=4);
    for _ in 0..rows {
        let kind = if rng.gen_bool(0.5) { RowKind::Eq } else { RowKind::Le };
        lp.add_row(kind, f64::from(rng.gen_range(0..=3)));
    }
    for _ in 0..rng.gen_range(1..=6) {
        let entries = (0..rows)
            .filter_map(|r| {
                let a = rng.gen_range(0..=2);
                (a > 0 && rng.gen_bool(0.7)).then_some((r, f64::from(a)))
            })
            .collect();
        lp.add_column(LpColumn {
            cost: f64::from(rng.gen_range(0..=10)),
            entries,
        });
    }
    lp
}

/// Optimum by enumerating every basis of `[A | S | E]`, where `S` holds the
/// slack columns of the at-most rows and `E` unit columns of the equality
/// rows that must stay at zero (they stand in for rank-deficient rows).
/// `None` when no basis is feasible.
pub fn vertex_optimum(lp: &LpProblem) -> Option<f64> {
    let rows = lp.rows().len();
    let mut columns: Vec<(f64, Vec<f64>, bool)> = lp
        .columns()
        .iter()
        .map(|c| {
            let mut dense = vec![0.0; rows];
            for &(r, a) in &c.entries {
                dense[r] += a;
            }
            (c.cost, dense, false)
        })
        .collect();
    for (r, &(kind, _)) in lp.rows().iter().enumerate() {
        let mut unit = vec![0.0; rows];
        unit[r] = 1.0;
        columns.push((0.0, unit, kind == RowKind::Eq));
    }
    let rhs: Vec<f64> = lp.rows().iter().map(|&(_, b)| b).collect();
    let mut best: Option<f64> = None;
    let mut chosen = Vec::new();
    subsets(columns.len(), rows, 0, &mut chosen, &mut |basis| {
        if let Some(x) = solve_square(basis.iter().map(|&j| &columns[j].1).collect(), &rhs) {
            let feasible = basis
                .iter()
                .zip(&x)
                .all(|(&j, &v)| v >= -1e-9 && (!columns[j].2 || v <= 1e-9));
            if feasible {
                let obj: f64 = basis.iter().zip(&x).map(|(&j, v)| columns[j].0 * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}

fn subsets(n: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for j in start..n {
        chosen.push(j);
        subsets(n, k, j + 1, chosen, f);
        chosen.pop();
    }
}

/// Solves `B x = b` for the square matrix with the given columns.
fn solve_square(cols: Vec<&Vec<f64>>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|r| cols.iter().map(|c| c[r]).chain(std::iter::once(b[r])).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=n {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    Some((0..n).map(|r| a[r][n] / a[r][r]).collect())
}
