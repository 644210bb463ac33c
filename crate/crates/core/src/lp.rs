//! Dense revised simplex for the restricted master problems.
//!
//! Problems are `min c·x` over `x ≥ 0` with equality and at-most rows whose
//! right-hand sides are nonnegative. Every at-most row gets a slack and every
//! equality row an artificial variable priced at a big-M penalty, so the
//! all-auxiliary basis is always a feasible start. A problem is infeasible
//! when an artificial stays basic at a positive value at the optimum.
//!
//! The basis inverse is kept explicitly and updated in product form, with a
//! fresh Gauss-Jordan factorization every [`REFACTOR_EVERY`] pivots. Dantzig
//! pricing is used until [`BLAND_AFTER`] consecutive degenerate pivots, after
//! which Bland's rule takes over until a step needs no bound shift.
//!
//! Restricted masters are heavily degenerate. When the ratio test blocks on
//! a variable sitting at its bound, that bound is moved down by a tiny
//! random amount so the step is strictly positive and the shifted objective
//! strictly decreases. At the optimum the shifts are dropped and a few dual
//! simplex pivots repair any infeasibility this leaves behind.
//!
//! An artificial that leaves the basis is retired for good. At an optimum,
//! artificials still basic at level zero are pivoted out where possible;
//! left in place they would pin their row's dual to the penalty and flood
//! column generation with useless columns.
//!
//! [`Simplex`] keeps its basis between solves, so a column generation loop
//! can append columns and re-optimize from the previous optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-7;
/// Relative to the magnitude of the terms forming a reduced cost.
pub const OPT_TOL: f64 = 1e-9;
pub const BLAND_AFTER: usize = 50;
pub const REFACTOR_EVERY: usize = 32;
pub const DEFAULT_ITERATION_LIMIT: usize = 100_000;
const DRIVE_OUT_TOL: f64 = 1e-7;
const RELATIVE_PIVOT_TOL: f64 = 1e-5;
const TIE_TOL: f64 = 1e-12;
const HARRIS_TOL: f64 = 1e-9;
/// Minimum distance a blocking variable is given below its bound.
const SHIFT: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-11;
const DUAL_CLEANUP_MIN: usize = 50;
/// Inverse entries below this are roundoff and are flushed to zero.
const DROP_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Le,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpColumn {
    pub cost: f64,
    /// `(row, coefficient)` pairs; rows not listed are zero.
    pub entries: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    rows: Vec<(RowKind, f64)>,
    columns: Vec<LpColumn>,
    big_m: f64,
}

impl LpProblem {
    pub fn new(big_m: f64) -> Self {
        LpProblem {
            rows: Vec::new(),
            columns: Vec::new(),
            big_m,
        }
    }

    pub fn add_row(&mut self, kind: RowKind, rhs: f64) -> usize {
        self.rows.push((kind, rhs));
        self.rows.len() - 1
    }

    pub fn add_column(&mut self, column: LpColumn) -> usize {
        self.columns.push(column);
        self.columns.len() - 1
    }

    pub fn rows(&self) -> &[(RowKind, f64)] {
        &self.rows
    }

    pub fn columns(&self) -> &[LpColumn] {
        &self.columns
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    fn check(&self) -> Result<(), LpError> {
        if self.rows.is_empty() {
            return Err(LpError::Malformed("problem has no rows".into()));
        }
        if !(self.big_m.is_finite() && self.big_m > 0.0) {
            return Err(LpError::Malformed(format!("big-M penalty {} must be positive", self.big_m)));
        }
        for (r, &(_, rhs)) in self.rows.iter().enumerate() {
            if !(rhs.is_finite() && rhs >= 0.0) {
                return Err(LpError::Malformed(format!("row {r} has right-hand side {rhs}")));
            }
        }
        for (v, col) in self.columns.iter().enumerate() {
            self.check_column(v, col)?;
        }
        Ok(())
    }

    fn check_column(&self, v: usize, col: &LpColumn) -> Result<(), LpError> {
        if !col.cost.is_finite() {
            return Err(LpError::Malformed(format!("column {v} has cost {}", col.cost)));
        }
        for &(r, a) in &col.entries {
            if r >= self.rows.len() || !a.is_finite() {
                return Err(LpError::Malformed(format!("column {v} has bad entry ({r}, {a})")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the structural columns, in insertion order.
    pub x: Vec<f64>,
    /// Objective including any artificial penalty.
    pub objective: f64,
    /// One dual price per row. For at-most rows these are `≤ 0`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn dual_objective(&self, problem: &LpProblem) -> f64 {
        problem.rows.iter().zip(&self.duals).map(|(&(_, b), y)| b * y).sum()
    }

    /// `c_v − y·a_v` for structural column `v`.
    pub fn reduced_cost(&self, problem: &LpProblem, v: usize) -> f64 {
        let col = &problem.columns[v];
        col.cost - col.entries.iter().map(|&(r, a)| a * self.duals[r]).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LpError {
    #[error("simplex exceeded the iteration limit of {limit}")]
    IterationLimit { limit: usize },
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("basis became numerically singular")]
    Singular,
}

/// Solves `problem` from the all-auxiliary basis.
pub fn solve(problem: &LpProblem) -> Result<LpSolution, LpError> {
    Simplex::new(problem.clone())?.solve()
}

/// Revised simplex state that survives column additions.
#[derive(Clone, Debug)]
pub struct Simplex {
    problem: LpProblem,
    /// Variable in each basis position.
    basis: Vec<Var>,
    binv: Vec<f64>,
    x_basic: Vec<f64>,
    in_basis: Vec<bool>,
    aux_in_basis: Vec<bool>,
    /// Artificials that have left the basis and may not re-enter.
    retired: Vec<bool>,
    /// Shifted lower bounds (`≤ 0`) of structurals and auxiliaries.
    lower: Vec<f64>,
    aux_lower: Vec<f64>,
    shifted: bool,
    rng: ChaCha8Rng,
    iteration_limit: usize,
    total_iterations: usize,
}

/// Structural columns order before the row auxiliaries (slack or
/// artificial), which Bland's rule relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    Structural(usize),
    Aux(usize),
}

impl Simplex {
    pub fn new(problem: LpProblem) -> Result<Self, LpError> {
        problem.check()?;
        let rows = problem.rows.len();
        let mut binv = vec![0.0; rows * rows];
        for r in 0..rows {
            binv[r * rows + r] = 1.0;
        }
        Ok(Simplex {
            basis: (0..rows).map(Var::Aux).collect(),
            x_basic: problem.rows.iter().map(|&(_, b)| b).collect(),
            retired: vec![false; rows],
            lower: vec![0.0; problem.columns.len()],
            aux_lower: vec![0.0; rows],
            shifted: false,
            rng: ChaCha8Rng::seed_from_u64(0),
            in_basis: vec![false; problem.columns.len()],
            aux_in_basis: vec![true; rows],
            binv,
            problem,
            iteration_limit: DEFAULT_ITERATION_LIMIT,
            total_iterations: 0,
        })
    }

    pub fn set_iteration_limit(&mut self, limit: usize) {
        self.iteration_limit = limit;
    }

    pub fn problem(&self) -> &LpProblem {
        &self.problem
    }

    pub fn num_columns(&self) -> usize {
        self.problem.columns.len()
    }

    /// Appends a nonbasic column; the current basis stays feasible.
    pub fn add_column(&mut self, column: LpColumn) -> Result<usize, LpError> {
        let v = self.problem.columns.len();
        self.problem.check_column(v, &column)?;
        self.problem.columns.push(column);
        self.in_basis.push(false);
        self.lower.push(0.0);
        Ok(v)
    }

    fn rows(&self) -> usize {
        self.problem.rows.len()
    }

    fn cost(&self, var: Var) -> f64 {
        match var {
            Var::Structural(v) => self.problem.columns[v].cost,
            Var::Aux(r) => match self.problem.rows[r].0 {
                RowKind::Le => 0.0,
                RowKind::Eq => self.problem.big_m,
            },
        }
    }

    fn is_artificial(&self, var: Var) -> bool {
        matches!(var, Var::Aux(r) if self.problem.rows[r].0 == RowKind::Eq)
    }

    fn duals(&self) -> Vec<f64> {
        let rows = self.rows();
        let mut y = vec![0.0; rows];
        for (p, &var) in self.basis.iter().enumerate() {
            let c = self.cost(var);
            if c != 0.0 {
                let row = &self.binv[p * rows..(p + 1) * rows];
                for (yr, b) in y.iter_mut().zip(row) {
                    *yr += c * b;
                }
            }
        }
        y
    }

    /// Reduced cost of `var` and the magnitude of the terms summed to get
    /// it, against which roundoff is judged.
    fn reduced(&self, var: Var, y: &[f64]) -> (f64, f64) {
        match var {
            Var::Structural(v) => {
                let col = &self.problem.columns[v];
                let (dot, size) = col
                    .entries
                    .iter()
                    .fold((0.0, 0.0), |(d, s), &(r, a)| (d + a * y[r], s + (a * y[r]).abs()));
                (col.cost - dot, col.cost.abs() + size)
            }
            Var::Aux(r) => (self.cost(var) - y[r], self.cost(var).abs() + y[r].abs()),
        }
    }

    /// `B⁻¹ a` for the given variable.
    fn ftran(&self, var: Var) -> Vec<f64> {
        let rows = self.rows();
        let mut alpha = vec![0.0; rows];
        let mut add = |r: usize, a: f64| {
            for (p, out) in alpha.iter_mut().enumerate() {
                *out += self.binv[p * rows + r] * a;
            }
        };
        match var {
            Var::Structural(v) => {
                for &(r, a) in &self.problem.columns[v].entries {
                    add(r, a);
                }
            }
            Var::Aux(r) => add(r, 1.0),
        }
        alpha
    }

    fn reset_basis(&mut self) {
        let rows = self.rows();
        self.basis = (0..rows).map(Var::Aux).collect();
        self.binv.iter_mut().for_each(|b| *b = 0.0);
        for r in 0..rows {
            self.binv[r * rows + r] = 1.0;
        }
        self.x_basic = self.problem.rows.iter().map(|&(_, b)| b).collect();
        self.retired.iter_mut().for_each(|r| *r = false);
        self.in_basis.iter_mut().for_each(|b| *b = false);
        self.aux_in_basis.iter_mut().for_each(|b| *b = true);
        self.clear_shifts();
    }

    fn clear_shifts(&mut self) {
        self.lower.iter_mut().for_each(|l| *l = 0.0);
        self.aux_lower.iter_mut().for_each(|l| *l = 0.0);
        self.shifted = false;
    }

    fn lower(&self, var: Var) -> f64 {
        match var {
            Var::Structural(v) => self.lower[v],
            Var::Aux(r) => self.aux_lower[r],
        }
    }

    fn set_lower(&mut self, var: Var, value: f64) {
        match var {
            Var::Structural(v) => self.lower[v] = value,
            Var::Aux(r) => self.aux_lower[r] = value,
        }
        self.shifted = true;
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let rows = self.rows();
        // Gauss-Jordan on [B | I] with partial pivoting.
        let mut b = vec![0.0; rows * rows];
        for (p, &var) in self.basis.iter().enumerate() {
            match var {
                Var::Structural(v) => {
                    for &(r, a) in &self.problem.columns[v].entries {
                        b[r * rows + p] += a;
                    }
                }
                Var::Aux(r) => b[r * rows + p] = 1.0,
            }
        }
        let mut inv = vec![0.0; rows * rows];
        for r in 0..rows {
            inv[r * rows + r] = 1.0;
        }
        for col in 0..rows {
            let pivot_row = (col..rows)
                .max_by(|&a, &c| b[a * rows + col].abs().total_cmp(&b[c * rows + col].abs()))
                .expect("nonempty range");
            if b[pivot_row * rows + col].abs() < 1e-12 {
                return Err(LpError::Singular);
            }
            if pivot_row != col {
                for c in 0..rows {
                    b.swap(pivot_row * rows + c, col * rows + c);
                    inv.swap(pivot_row * rows + c, col * rows + c);
                }
            }
            let piv = b[col * rows + col];
            for c in 0..rows {
                b[col * rows + c] /= piv;
                inv[col * rows + c] /= piv;
            }
            for r in 0..rows {
                if r != col {
                    let factor = b[r * rows + col];
                    if factor != 0.0 {
                        for c in 0..rows {
                            b[r * rows + c] -= factor * b[col * rows + c];
                            inv[r * rows + c] -= factor * inv[col * rows + c];
                        }
                    }
                }
            }
        }
        for b in inv.iter_mut().filter(|b| b.abs() < DROP_TOL) {
            *b = 0.0;
        }
        self.binv = inv;
        self.recompute_primal();
        Ok(())
    }

    /// `x_B = B⁻¹ (b − N l_N)` with nonbasic variables at their shifted bounds.
    fn recompute_primal(&mut self) {
        let rows = self.rows();
        let mut rhs: Vec<f64> = self.problem.rows.iter().map(|&(_, b)| b).collect();
        if self.shifted {
            for (v, col) in self.problem.columns.iter().enumerate() {
                if !self.in_basis[v] && self.lower[v] != 0.0 {
                    for &(r, a) in &col.entries {
                        rhs[r] -= a * self.lower[v];
                    }
                }
            }
            for r in 0..rows {
                if !self.aux_in_basis[r] {
                    rhs[r] -= self.aux_lower[r];
                }
            }
        }
        for p in 0..rows {
            let row = &self.binv[p * rows..(p + 1) * rows];
            let v: f64 = row.iter().zip(&rhs).map(|(bi, r)| bi * r).sum();
            self.x_basic[p] = if v.abs() < ZERO_TOL { 0.0 } else { v };
        }
    }

    /// Leaving position and step length, or `None` when the entering
    /// direction is unbounded.
    ///
    /// Harris two-pass test against the shifted bounds, preferring large
    /// pivots. A blocking variable closer than [`SHIFT`] to its bound has
    /// the bound moved down so that every step is strictly positive.
    fn ratio_test(&mut self, alpha: &[f64], bland: bool) -> Option<(usize, f64, bool)> {
        let rows = self.rows();
        let largest = alpha.iter().fold(0.0f64, |m, &a| m.max(a));
        let threshold = PIVOT_TOL.max(RELATIVE_PIVOT_TOL * largest);
        let slack = |p: usize| (self.x_basic[p] - self.lower(self.basis[p])).max(0.0);
        let bound = (0..rows)
            .filter(|&p| alpha[p] > threshold)
            .map(|p| (slack(p) + HARRIS_TOL) / alpha[p])
            .fold(f64::INFINITY, f64::min);
        if bound == f64::INFINITY {
            return None;
        }
        let p = if bland {
            let exact = (0..rows)
                .filter(|&p| alpha[p] > threshold)
                .map(|p| slack(p) / alpha[p])
                .fold(f64::INFINITY, f64::min);
            (0..rows)
                .filter(|&p| alpha[p] > threshold && slack(p) / alpha[p] <= exact + TIE_TOL)
                .min_by_key(|&p| self.basis[p])?
        } else {
            (0..rows)
                .filter(|&p| alpha[p] > threshold && slack(p) / alpha[p] <= bound)
                .max_by(|&l, &r| alpha[l].total_cmp(&alpha[r]).then(r.cmp(&l)))?
        };
        let blocking = slack(p);
        let degenerate = blocking < SHIFT;
        if degenerate {
            let shift = SHIFT * (1.0 + self.rng.gen::<f64>());
            let var = self.basis[p];
            self.set_lower(var, self.x_basic[p] - shift);
        }
        let room = if degenerate { self.x_basic[p] - self.lower(self.basis[p]) } else { blocking };
        Some((p, room / alpha[p], degenerate))
    }

    /// Runs the simplex from the current basis to optimality.
    pub fn solve(&mut self) -> Result<LpSolution, LpError> {
        let mut degenerate_run = 0usize;
        let mut iterations = 0usize;
        let mut restarted = false;
        let mut repair_stalled = false;
        if self.refactor().is_err() {
            self.reset_basis();
            restarted = true;
        }
        loop {
            if iterations > 0 && iterations % REFACTOR_EVERY == 0 && self.refactor().is_err() {
                if restarted {
                    return Err(LpError::Singular);
                }
                log::warn!("singular basis after {iterations} pivots, restarting from the auxiliary basis");
                self.reset_basis();
                restarted = true;
                degenerate_run = 0;
            }
            let bland = degenerate_run >= BLAND_AFTER;
            let y = self.duals();
            let Some(enter) = self.entering(&y, bland) else {
                if self.shifted {
                    self.clear_shifts();
                    if self.refactor().is_err() {
                        return Err(LpError::Singular);
                    }
                    if !self.restore_feasibility(&mut iterations)? {
                        if !repair_stalled {
                            repair_stalled = true;
                            continue;
                        }
                        // no pivot helped twice running; the residue is roundoff
                        log::warn!("accepting a basis with primal infeasibility after {iterations} pivots");
                        self.clear_shifts();
                        self.recompute_primal();
                    }
                }
                if self.drive_out_artificials() {
                    iterations += 1;
                    continue;
                }
                return Ok(self.finish(y, iterations));
            };
            if iterations >= self.iteration_limit {
                return Err(LpError::IterationLimit {
                    limit: self.iteration_limit,
                });
            }
            iterations += 1;
            self.total_iterations += 1;

            let alpha = self.ftran(enter);
            let Some((pivot, theta, degenerate)) = self.ratio_test(&alpha, bland) else {
                return Err(LpError::Unbounded);
            };
            degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
            repair_stalled = false;
            self.pivot(enter, &alpha, pivot, theta);
            // Harris steps may overshoot other bounds by a hair; absorb it.
            for p in 0..self.rows() {
                let var = self.basis[p];
                if self.x_basic[p] < self.lower(var) {
                    self.set_lower(var, self.x_basic[p]);
                }
            }
        }
    }

    /// Dual simplex pivots that remove the small primal infeasibilities
    /// left after dropping the bound shifts. Returns `Ok(true)` when the
    /// basis ends primal feasible; otherwise the offending bounds are
    /// shifted again and the primal loop resumes.
    fn restore_feasibility(&mut self, iterations: &mut usize) -> Result<bool, LpError> {
        let rows = self.rows();
        for _ in 0..rows.max(DUAL_CLEANUP_MIN) {
            let Some(p) = (0..rows)
                .filter(|&p| self.x_basic[p] < -FEAS_TOL)
                .min_by(|&l, &r| self.x_basic[l].total_cmp(&self.x_basic[r]))
            else {
                return Ok(true);
            };
            if *iterations >= self.iteration_limit {
                return Err(LpError::IterationLimit {
                    limit: self.iteration_limit,
                });
            }
            let y = self.duals();
            let row = &self.binv[p * rows..(p + 1) * rows];
            let mut best: Option<(Var, f64, f64)> = None;
            let mut consider = |var: Var, a: f64, d: f64| {
                if a < -PIVOT_TOL {
                    let ratio = d.max(0.0) / -a;
                    let better = match best {
                        None => true,
                        Some((_, br, ba)) => ratio < br - TIE_TOL || (ratio <= br + TIE_TOL && -a > -ba),
                    };
                    if better {
                        best = Some((var, ratio, a));
                    }
                }
            };
            for (v, col) in self.problem.columns.iter().enumerate() {
                if !self.in_basis[v] {
                    let a: f64 = col.entries.iter().map(|&(r, a)| row[r] * a).sum();
                    if a < -PIVOT_TOL {
                        consider(Var::Structural(v), a, self.reduced(Var::Structural(v), &y).0);
                    }
                }
            }
            for r in 0..rows {
                if !self.aux_in_basis[r] && !self.retired[r] {
                    consider(Var::Aux(r), row[r], self.reduced(Var::Aux(r), &y).0);
                }
            }
            let Some((enter, _, _)) = best else { break };
            *iterations += 1;
            self.total_iterations += 1;
            let alpha = self.ftran(enter);
            let theta = self.x_basic[p] / alpha[p];
            self.pivot(enter, &alpha, p, theta);
        }
        for p in 0..rows {
            if self.x_basic[p] < -FEAS_TOL {
                let var = self.basis[p];
                self.set_lower(var, self.x_basic[p]);
            }
        }
        Ok(!self.shifted)
    }

    /// Dantzig's most negative reduced cost, or under Bland's rule the
    /// first improving variable (structurals precede auxiliaries).
    fn entering(&self, y: &[f64], bland: bool) -> Option<Var> {
        let rows = self.rows();
        let candidates = (0..self.problem.columns.len())
            .filter(|&v| !self.in_basis[v])
            .map(Var::Structural)
            .chain((0..rows).filter(|&r| !self.aux_in_basis[r] && !self.retired[r]).map(Var::Aux));
        let mut best: Option<(Var, f64)> = None;
        for var in candidates {
            let (d, size) = self.reduced(var, y);
            if d < -OPT_TOL * (1.0 + size) {
                if bland {
                    return Some(var);
                }
                if best.map_or(true, |(_, b)| d < b) {
                    best = Some((var, d));
                }
            }
        }
        best.map(|(var, _)| var)
    }

    /// Replaces one artificial basic at level zero by a nonbasic variable.
    /// Returns whether a pivot was made.
    fn drive_out_artificials(&mut self) -> bool {
        let rows = self.rows();
        for p in 0..rows {
            if !self.is_artificial(self.basis[p]) || self.x_basic[p].abs() > FEAS_TOL {
                continue;
            }
            let row = &self.binv[p * rows..(p + 1) * rows];
            let best = (0..self.problem.columns.len())
                .filter(|&v| !self.in_basis[v])
                .map(|v| {
                    let a: f64 = self.problem.columns[v].entries.iter().map(|&(r, a)| row[r] * a).sum();
                    (Var::Structural(v), a)
                })
                .chain(
                    (0..rows)
                        .filter(|&r| self.problem.rows[r].0 == RowKind::Le && !self.aux_in_basis[r])
                        .map(|r| (Var::Aux(r), row[r])),
                )
                .filter(|&(_, a)| a.abs() > DRIVE_OUT_TOL)
                .max_by(|l, r| l.1.abs().total_cmp(&r.1.abs()));
            if let Some((enter, _)) = best {
                let alpha = self.ftran(enter);
                self.pivot(enter, &alpha, p, 0.0);
                return true;
            }
        }
        false
    }

    fn pivot(&mut self, enter: Var, alpha: &[f64], pivot: usize, theta: f64) {
        let rows = self.rows();
        for p in 0..rows {
            if p != pivot {
                self.x_basic[p] -= theta * alpha[p];
                if self.x_basic[p].abs() < ZERO_TOL {
                    self.x_basic[p] = 0.0;
                }
            }
        }
        self.x_basic[pivot] = self.lower(enter) + theta;

        let piv = alpha[pivot];
        let (head, rest) = self.binv.split_at_mut(pivot * rows);
        let (pivot_row, tail) = rest.split_at_mut(rows);
        for b in pivot_row.iter_mut() {
            *b /= piv;
        }
        let others = head.chunks_exact_mut(rows).zip(&alpha[..pivot]);
        let others = others.chain(tail.chunks_exact_mut(rows).zip(&alpha[pivot + 1..]));
        for (row, &f) in others {
            if f != 0.0 {
                for (b, pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *b -= f * pr;
                    if b.abs() < DROP_TOL {
                        *b = 0.0;
                    }
                }
            }
        }

        let leaving = self.basis[pivot];
        match leaving {
            Var::Structural(v) => self.in_basis[v] = false,
            Var::Aux(r) => {
                self.aux_in_basis[r] = false;
                if self.is_artificial(leaving) {
                    self.retired[r] = true;
                }
            }
        }
        match enter {
            Var::Structural(v) => self.in_basis[v] = true,
            Var::Aux(r) => self.aux_in_basis[r] = true,
        }
        self.basis[pivot] = enter;
    }

    fn finish(&self, duals: Vec<f64>, iterations: usize) -> LpSolution {
        let mut x = vec![0.0; self.problem.columns.len()];
        let mut objective = 0.0;
        let mut infeasible = false;
        for (p, &var) in self.basis.iter().enumerate() {
            let value = self.x_basic[p].max(0.0);
            objective += self.cost(var) * value;
            match var {
                Var::Structural(v) => x[v] = value,
                Var::Aux(_) => {
                    if self.is_artificial(var) && value > FEAS_TOL {
                        infeasible = true;
                    }
                }
            }
        }
        LpSolution {
            status: if infeasible {
                LpStatus::Infeasible
            } else {
                LpStatus::Optimal
            },
            x,
            objective,
            duals,
            iterations,
        }
    }
}
