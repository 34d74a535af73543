//! Dense two-phase tableau simplex with Bland's anti-cycling rule.

use serde::Serialize;

use super::program::{LinearProgram, Relation, Sense};
use crate::error::{Result, SpvtError};

/// Reduced costs above `-COST_EPS` count as non-improving.
const COST_EPS: f64 = 1e-12;
/// Smallest pivot element accepted by the ratio test.
const PIVOT_EPS: f64 = 1e-10;
/// Phase one ends infeasible above this artificial mass.
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    /// Structural plus slack plus artificial columns, excluding the rhs.
    cols: usize,
    /// `rows` constraint rows then the reduced-cost row, each `cols + 1` wide.
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may never enter the basis.
    barred: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.data[pr * w + pc];
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Loads `cost` (to be maximized) into the last row as reduced costs
    /// `c_B B^-1 A - c`.
    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width();
        let zr = self.rows * w;
        for c in 0..w {
            self.data[zr + c] = if c < self.cols { -cost[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..w {
                    self.data[zr + c] += cb * self.data[r * w + c];
                }
            }
        }
    }

    /// Runs to optimality; `Err(Unbounded)` if the objective can grow forever.
    fn optimize(&mut self) -> Result<()> {
        let zr = self.rows;
        loop {
            // Bland: lowest-index improving column.
            let Some(pc) = (0..self.cols).find(|&c| !self.barred[c] && self.at(zr, c) < -COST_EPS)
            else {
                return Ok(());
            };
            // Ratio test; ties go to the lowest basic variable index.
            let mut best: Option<(f64, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match best {
                        None => true,
                        Some((br, bp)) => {
                            ratio < br - 1e-15
                                || (ratio <= br + 1e-15 && self.basis[r] < self.basis[bp])
                        }
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
            }
            match best {
                Some((_, pr)) => self.pivot(pr, pc),
                None => return Err(SpvtError::Unbounded),
            }
        }
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let nv = lp.num_vars();
    // Dense rows, with upper bounds folded in as extra constraints and
    // every right-hand side made non-negative.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in lp.constraints() {
        let mut dense = vec![0.0; nv];
        for &(v, a) in &c.coeffs {
            dense[v] += a;
        }
        rows.push((dense, c.relation, c.rhs));
    }
    for (v, u) in lp.upper_bounds().iter().enumerate() {
        if let Some(u) = *u {
            let mut dense = vec![0.0; nv];
            dense[v] = 1.0;
            rows.push((dense, Relation::Le, u));
        }
    }
    for (dense, rel, rhs) in &mut rows {
        if *rhs < 0.0 {
            dense.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = nv + n_slack + n_art;
    let w = cols + 1;
    let mut t = Tableau {
        rows: m,
        cols,
        data: vec![0.0; (m + 1) * w],
        basis: vec![0; m],
        barred: vec![false; cols],
        pivots: 0,
    };
    let (mut next_slack, mut next_art) = (nv, nv + n_slack);
    for (r, (dense, rel, rhs)) in rows.iter().enumerate() {
        t.data[r * w..r * w + nv].copy_from_slice(dense);
        t.data[r * w + cols] = *rhs;
        match rel {
            Relation::Le => {
                t.data[r * w + next_slack] = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.data[r * w + next_slack] = -1.0;
                next_slack += 1;
                t.data[r * w + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.data[r * w + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    let art_start = nv + n_slack;
    if n_art > 0 {
        let mut cost = vec![0.0; cols];
        cost[art_start..].iter_mut().for_each(|c| *c = -1.0);
        t.set_costs(&cost);
        t.optimize()?;
        let mass: f64 = (0..m)
            .filter(|&r| t.basis[r] >= art_start)
            .map(|r| t.rhs(r))
            .sum();
        if mass > FEAS_EPS {
            return Err(SpvtError::Infeasible);
        }
        // Drive zero-level artificials out where a real column can replace them.
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(pc) = (0..art_start).find(|&c| t.at(r, c).abs() > PIVOT_EPS) {
                    t.pivot(r, pc);
                }
            }
        }
        t.barred[art_start..].iter_mut().for_each(|b| *b = true);
    }

    let sign = match lp.sense() {
        Sense::Max => 1.0,
        Sense::Min => -1.0,
    };
    let mut cost = vec![0.0; cols];
    for (c, &o) in cost.iter_mut().zip(lp.objective()) {
        *c = sign * o;
    }
    t.set_costs(&cost);
    t.optimize()?;

    let mut values = vec![0.0; nv];
    for r in 0..m {
        if t.basis[r] < nv {
            values[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let objective = lp.evaluate(&values);
    Ok(LpSolution {
        values,
        objective,
        pivots: t.pivots,
    })
}
