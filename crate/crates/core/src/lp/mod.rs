//! Dense revised simplex for standard-form linear programs
//!
//! ```text
//! min c^T x   s.t.  A x = b,  x >= 0
//! ```
//!
//! `A` is stored column-major, so a hull whose extreme points are stored
//! row-by-row is already the constraint matrix of the gauge problem with no
//! copy. The basis inverse is kept explicitly (rows are at most a few hundred)
//! with product-form updates and periodic refactorization. Pricing is
//! partial: each pass scans a section of columns, resuming where the last
//! one stopped, which matters when there are many more columns than rows.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Nonzero structural variables as `(column, value)`, sorted by column.
    pub x: Vec<(usize, f64)>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    pub max_iterations: usize,
    /// Columns scanned per pricing pass before settling for the best found
    /// so far; 0 means twice the row count.
    pub price_block: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-10,
            pivot_tol: 1e-9,
            refactor_every: 50,
            max_iterations: 200_000,
            price_block: 0,
        }
    }
}

/// Borrowed standard-form problem.
#[derive(Debug, Clone, Copy)]
pub struct StandardForm<'a> {
    pub rows: usize,
    pub cols: usize,
    /// Column-major `rows x cols` constraint matrix.
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub c: &'a [f64],
}

impl StandardForm<'_> {
    fn column(&self, j: usize) -> &[f64] {
        &self.a[j * self.rows..(j + 1) * self.rows]
    }
}

pub fn solve(lp: &StandardForm<'_>) -> Result<LpSolution> {
    solve_with(lp, SimplexOptions::default())
}

pub fn solve_with(lp: &StandardForm<'_>, opts: SimplexOptions) -> Result<LpSolution> {
    if lp.a.len() != lp.rows * lp.cols || lp.b.len() != lp.rows || lp.c.len() != lp.cols {
        return Err(Error::DimensionMismatch(format!(
            "LP shapes: A has {} entries for {}x{}, b has {}, c has {}",
            lp.a.len(),
            lp.rows,
            lp.cols,
            lp.b.len(),
            lp.c.len()
        )));
    }
    Simplex::new(lp, opts).run()
}

const NONE: usize = usize::MAX;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

struct Simplex<'a> {
    lp: &'a StandardForm<'a>,
    opts: SimplexOptions,
    m: usize,
    /// Row signs making the right-hand side non-negative.
    sign: Vec<f64>,
    rhs: Vec<f64>,
    /// `basis[r]` is a structural column `< cols` or artificial `cols + r'`.
    basis: Vec<usize>,
    /// Position of each structural column in the basis, or NONE.
    position: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    phase_one: bool,
    block: usize,
    cursor: usize,
    // scratch
    y: Vec<f64>,
    ys: Vec<f64>,
    dir: Vec<f64>,
    col: Vec<f64>,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StandardForm<'a>, opts: SimplexOptions) -> Self {
        let m = lp.rows;
        let sign: Vec<f64> =
            lp.b.iter()
                .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
                .collect();
        let rhs: Vec<f64> = lp.b.iter().map(|v| v.abs()).collect();
        let block = match opts.price_block {
            0 => (2 * m).min(lp.cols),
            b => b.min(lp.cols),
        };
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Simplex {
            lp,
            opts,
            m,
            sign,
            xb: rhs.clone(),
            rhs,
            basis: (0..m).map(|r| lp.cols + r).collect(),
            position: vec![NONE; lp.cols],
            binv,
            iterations: 0,
            since_refactor: 0,
            phase_one: true,
            block,
            cursor: 0,
            y: vec![0.0; m],
            ys: vec![0.0; m],
            dir: vec![0.0; m],
            col: vec![0.0; m],
        }
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.lp.cols
    }

    fn cost(&self, var: usize) -> f64 {
        match (self.phase_one, self.is_artificial(var)) {
            (true, true) => 1.0,
            (true, false) => 0.0,
            (false, true) => 0.0,
            (false, false) => self.lp.c[var],
        }
    }

    /// Sign-adjusted column of a (structural or artificial) variable into `out`.
    fn load_column(&self, var: usize, out: &mut [f64]) {
        if self.is_artificial(var) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[var - self.lp.cols] = 1.0;
        } else {
            for ((o, &a), &s) in out.iter_mut().zip(self.lp.column(var)).zip(&self.sign) {
                *o = a * s;
            }
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..m {
            let cb = self.cost(self.basis[r]);
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yk, &bk) in self.y.iter_mut().zip(row) {
                    *yk += cb * bk;
                }
            }
        }
        // Fold the row signs into the duals so pricing can read raw columns.
        for k in 0..m {
            self.ys[k] = self.y[k] * self.sign[k];
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        self.cost(j) - dot(self.lp.column(j), &self.ys)
    }

    /// Entering column. Dantzig's rule over sections of `block` columns
    /// starting where the previous pass stopped; a full scan is needed to
    /// declare optimality. With `bland`, the lowest eligible index.
    fn price(&mut self, bland: bool) -> Option<usize> {
        let n = self.lp.cols;
        let tol = -self.opts.optimality_tol;
        if bland {
            return (0..n).find(|&j| self.position[j] == NONE && self.reduced_cost(j) < tol);
        }
        let mut best = NONE;
        let mut best_d = tol;
        let mut j = self.cursor;
        for scanned in 1..=n {
            if self.position[j] == NONE {
                let d = self.reduced_cost(j);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            j += 1;
            if j == n {
                j = 0;
            }
            if best != NONE && scanned >= self.block {
                break;
            }
        }
        self.cursor = j;
        (best != NONE).then_some(best)
    }

    fn ftran(&mut self, var: usize) {
        let m = self.m;
        let mut col = std::mem::take(&mut self.col);
        self.load_column(var, &mut col);
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.dir[r] = row.iter().zip(&col).map(|(a, b)| a * b).sum();
        }
        self.col = col;
    }

    /// Harris two-pass ratio test; returns the leaving row.
    fn ratio_test(&self, bland: bool) -> Option<usize> {
        let tol = self.opts.pivot_tol;
        let mut bound = f64::INFINITY;
        for r in 0..self.m {
            if self.dir[r] > tol {
                bound = bound.min((self.xb[r] + self.opts.feasibility_tol) / self.dir[r]);
            }
        }
        if bound == f64::INFINITY {
            return None;
        }
        let mut leave = NONE;
        let mut best = 0.0;
        for r in 0..self.m {
            let d = self.dir[r];
            if d > tol && self.xb[r] / d <= bound {
                let better = if bland {
                    leave == NONE || self.basis[r] < self.basis[leave]
                } else {
                    d > best
                };
                // Artificials leave first whenever they are eligible.
                let artificial = self.is_artificial(self.basis[r]);
                let leave_artificial = leave != NONE && self.is_artificial(self.basis[leave]);
                if leave == NONE
                    || (artificial && !leave_artificial)
                    || (artificial == leave_artificial && better)
                {
                    leave = r;
                    best = d;
                }
            }
        }
        (leave != NONE).then_some(leave)
    }

    fn pivot(&mut self, leave: usize, enter: usize) {
        let m = self.m;
        let piv = self.dir[leave];
        let theta = (self.xb[leave] / piv).max(0.0);
        for r in 0..m {
            if r != leave {
                self.xb[r] = (self.xb[r] - theta * self.dir[r]).max(0.0);
            }
        }
        self.xb[leave] = theta;
        let (head, tail) = self.binv.split_at_mut(leave * m);
        let (prow, rest) = tail.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (r, row) in head.chunks_exact_mut(m).enumerate() {
            let f = self.dir[r];
            if f != 0.0 {
                row.iter_mut()
                    .zip(prow.iter())
                    .for_each(|(a, p)| *a -= f * p);
            }
        }
        for (k, row) in rest.chunks_exact_mut(m).enumerate() {
            let f = self.dir[leave + 1 + k];
            if f != 0.0 {
                row.iter_mut()
                    .zip(prow.iter())
                    .for_each(|(a, p)| *a -= f * p);
            }
        }
        let old = self.basis[leave];
        if !self.is_artificial(old) {
            self.position[old] = NONE;
        }
        self.basis[leave] = enter;
        self.position[enter] = leave;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        let mut col = vec![0.0; m];
        for r in 0..m {
            self.load_column(self.basis[r], &mut col);
            for i in 0..m {
                bmat[(i, r)] = col[i];
            }
        }
        let inv = bmat
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular simplex basis".into()))?;
        for r in 0..m {
            for k in 0..m {
                self.binv[r * m + k] = inv[(r, k)];
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.xb[r] = row
                .iter()
                .zip(&self.rhs)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .max(0.0);
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn objective(&self) -> f64 {
        (0..self.m)
            .map(|r| self.cost(self.basis[r]) * self.xb[r])
            .sum()
    }

    /// Iterates the current phase to optimality. Returns false if unbounded.
    fn iterate(&mut self) -> Result<bool> {
        let mut stalled = 0usize;
        let mut last_obj = self.objective();
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::IterationLimit(self.iterations));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let bland = stalled > 2 * self.m + 10;
            self.compute_duals();
            let Some(enter) = self.price(bland) else {
                return Ok(true);
            };
            self.ftran(enter);
            let Some(leave) = self.ratio_test(bland) else {
                return Ok(false);
            };
            self.pivot(leave, enter);
            let obj = self.objective();
            if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                stalled = 0;
                last_obj = obj;
            } else {
                stalled += 1;
            }
        }
    }

    /// Pivots zero-level artificials out of the basis where some structural
    /// column has a usable entry in their row.
    fn expel_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m]
                .iter()
                .zip(&self.sign)
                .map(|(b, s)| b * s)
                .collect();
            let mut best = NONE;
            let mut best_v = 1e-7;
            for j in 0..self.lp.cols {
                if self.position[j] != NONE {
                    continue;
                }
                let v: f64 = self.lp.column(j).iter().zip(&row).map(|(a, b)| a * b).sum();
                if v.abs() > best_v {
                    best = j;
                    best_v = v.abs();
                }
            }
            if best != NONE {
                self.ftran(best);
                // Degenerate pivot: the artificial sits at zero.
                self.xb[r] = 0.0;
                self.pivot(r, best);
            }
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |m, v| m.max(*v));
        if self.iterate()? {
            self.refactor()?;
            let infeas = self.objective();
            if infeas > self.opts.feasibility_tol * scale * 10.0 {
                // One more pass in case refactorization exposed drift.
                self.iterate()?;
                self.refactor()?;
                if self.objective() > self.opts.feasibility_tol * scale * 10.0 {
                    return Ok(self.finish(LpStatus::Infeasible));
                }
            }
        }
        for r in 0..self.m {
            if self.is_artificial(self.basis[r]) {
                self.xb[r] = 0.0;
            }
        }
        self.expel_artificials();
        self.phase_one = false;
        let bounded = self.iterate()?;
        self.refactor()?;
        if !bounded {
            return Ok(self.finish(LpStatus::Unbounded));
        }
        // Refactorization may reveal a few more improving columns.
        if !self.iterate()? {
            return Ok(self.finish(LpStatus::Unbounded));
        }
        self.refactor()?;
        Ok(self.finish(LpStatus::Optimal))
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let mut x: Vec<(usize, f64)> = (0..self.m)
            .filter(|&r| !self.is_artificial(self.basis[r]) && self.xb[r] > 0.0)
            .map(|r| (self.basis[r], self.xb[r]))
            .collect();
        x.sort_by_key(|&(j, _)| j);
        let objective = x.iter().map(|&(j, v)| self.lp.c[j] * v).sum();
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests;
