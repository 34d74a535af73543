//! Primal programs over value-independent selling strategies.
//!
//! `x[i,j]` is the probability of selling to the `j`-th buyer given that the
//! seller arrived `i`-th, where that buyer is the first best-so-far buyer
//! to appear. In the weak program `y[i,j]` is the same for a buyer that is
//! second best so far, and `A` is the guaranteed fraction of the weak
//! benchmark.

use serde::Serialize;

use super::program::{LinearProgram, Relation, Sense};
use super::simplex::{simplex_solve, LpSolution};
use crate::error::{invalid_arg, Result, SpvtError};

/// Largest `n` accepted by the primal builders.
pub const PRIMAL_SIZE_CAP: usize = 60;

/// Position of `(i, j)`, `1 <= i <= j <= n`, in row-major order over `i`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i <= j && j <= n);
    (i - 1) * (n + 1) - (i - 1) * i / 2 + (j - i)
}

pub fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

fn check_size(n: usize) -> Result<()> {
    if n < 1 {
        return Err(invalid_arg("n must be at least 1"));
    }
    if n > PRIMAL_SIZE_CAP {
        return Err(SpvtError::SizeLimit {
            what: "primal LP n",
            got: n,
            cap: PRIMAL_SIZE_CAP,
        });
    }
    Ok(())
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i..=n).map(move |j| (i, j)))
}

/// `max sum_{i<=j} j / (n (n+1)) x[i,j]` subject to
/// `j x[i,j] + sum_{k=i}^{j-1} x[i,k] <= 1`.
pub fn build_strong_primal(n: usize) -> Result<LinearProgram> {
    check_size(n)?;
    let mut lp = LinearProgram::new(Sense::Max);
    let scale = 1.0 / ((n + 1) * n) as f64;
    for (i, j) in pairs(n) {
        lp.add_var(format!("x[{i},{j}]"), j as f64 * scale)?;
    }
    for (i, j) in pairs(n) {
        let mut row: Vec<(usize, f64)> = (i..j).map(|k| (pair_index(n, i, k), 1.0)).collect();
        row.push((pair_index(n, i, j), j as f64));
        lp.add_constraint(row, Relation::Le, 1.0)?;
    }
    Ok(lp)
}

/// `max A` over `x`, `y` and `A` with the two stopping constraints per
/// pair and the two benchmark constraints. Variables are all `x` pairs,
/// then all `y` pairs, then `A`.
pub fn build_weak_primal(n: usize) -> Result<LinearProgram> {
    check_size(n)?;
    let mut lp = LinearProgram::new(Sense::Max);
    let p = pair_count(n);
    for (i, j) in pairs(n) {
        lp.add_var(format!("x[{i},{j}]"), 0.0)?;
    }
    for (i, j) in pairs(n) {
        lp.add_var(format!("y[{i},{j}]"), 0.0)?;
    }
    let a = lp.add_var("A", 1.0)?;
    for own in [0, p] {
        for (i, j) in pairs(n) {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * (j - i) + 1);
            for k in i..j {
                row.push((pair_index(n, i, k), 1.0));
                row.push((p + pair_index(n, i, k), 1.0));
            }
            row.push((own + pair_index(n, i, j), j as f64));
            lp.add_constraint(row, Relation::Le, 1.0)?;
        }
    }
    let nf = n as f64;
    let denom = (n * n + n) as f64;
    // A - 2 sum j/(n^2+n) x <= 0
    let mut row = vec![(a, 1.0)];
    for (i, j) in pairs(n) {
        row.push((pair_index(n, i, j), -2.0 * j as f64 / denom));
    }
    lp.add_constraint(row, Relation::Le, 0.0)?;
    // A - 1.5 sum j/(n^2+n) ((2n-j)/n x + (j-1)/n y) <= 0
    let mut row = vec![(a, 1.0)];
    for (i, j) in pairs(n) {
        let jf = j as f64;
        let base = 1.5 * jf / denom;
        row.push((pair_index(n, i, j), -base * (2.0 * nf - jf) / nf));
        if j > 1 {
            row.push((p + pair_index(n, i, j), -base * (jf - 1.0) / nf));
        }
    }
    lp.add_constraint(row, Relation::Le, 0.0)?;
    Ok(lp)
}

/// Which primal program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimalKind {
    Strong,
    Weak,
}

impl std::str::FromStr for PrimalKind {
    type Err = SpvtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(PrimalKind::Strong),
            "weak" => Ok(PrimalKind::Weak),
            other => Err(invalid_arg(format!(
                "unknown program {other:?}; expected strong or weak"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalSolution {
    pub kind: PrimalKind,
    pub n: usize,
    /// `x[pair_index(n, i, j)]`.
    pub x: Vec<f64>,
    /// Empty for the strong program.
    pub y: Vec<f64>,
    /// Weak program only.
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub objective_value: f64,
    pub max_violation: f64,
    pub feasible: bool,
    pub pivots: usize,
}

impl PrimalSolution {
    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.x[pair_index(self.n, i, j)]
    }

    pub fn y(&self, i: usize, j: usize) -> f64 {
        self.y[pair_index(self.n, i, j)]
    }

    fn from_values(
        kind: PrimalKind,
        n: usize,
        lp: &LinearProgram,
        values: &[f64],
        pivots: usize,
    ) -> Self {
        let p = pair_count(n);
        let (max_violation, _) = lp.max_violation(values);
        let (x, y, a) = match kind {
            PrimalKind::Strong => (values.to_vec(), Vec::new(), None),
            PrimalKind::Weak => (
                values[..p].to_vec(),
                values[p..2 * p].to_vec(),
                Some(values[2 * p]),
            ),
        };
        PrimalSolution {
            kind,
            n,
            x,
            y,
            a,
            objective_value: lp.evaluate(values),
            max_violation,
            feasible: max_violation <= 1e-9,
            pivots,
        }
    }
}

pub fn build_primal(kind: PrimalKind, n: usize) -> Result<LinearProgram> {
    match kind {
        PrimalKind::Strong => build_strong_primal(n),
        PrimalKind::Weak => build_weak_primal(n),
    }
}

pub fn solve_primal(kind: PrimalKind, n: usize) -> Result<PrimalSolution> {
    let lp = build_primal(kind, n)?;
    let LpSolution { values, pivots, .. } = simplex_solve(&lp)?;
    Ok(PrimalSolution::from_values(kind, n, &lp, &values, pivots))
}

/// Optimum of the strong program computed as `n` independent programs,
/// one per seller position `i`.
pub fn solve_strong_primal_by_seller_position(n: usize) -> Result<f64> {
    check_size(n)?;
    let scale = 1.0 / ((n + 1) * n) as f64;
    let mut total = 0.0;
    for i in 1..=n {
        let mut lp = LinearProgram::new(Sense::Max);
        for j in i..=n {
            lp.add_var(format!("x[{i},{j}]"), j as f64 * scale)?;
        }
        for j in i..=n {
            let mut row: Vec<(usize, f64)> = (i..j).map(|k| (k - i, 1.0)).collect();
            row.push((j - i, j as f64));
            lp.add_constraint(row, Relation::Le, 1.0)?;
        }
        total += simplex_solve(&lp)?.objective;
    }
    Ok(total)
}

/// Weak-program point induced by a strategy that, at the `j`-th buyer,
/// sells to a best-so-far buyer with probability `first[j-1]` and to a
/// second-best-so-far buyer with probability `second[j-1]`, with `A` set
/// to `min(2 p1, 1.5 (p1 + p2))`.
pub fn weak_primal_from_policy(n: usize, first: &[f64], second: &[f64]) -> Result<PrimalSolution> {
    check_size(n)?;
    if first.len() != n || second.len() != n {
        return Err(invalid_arg(format!(
            "need {n} stopping probabilities of each kind"
        )));
    }
    if first.iter().chain(second).any(|q| !(0.0..=1.0).contains(q))
        || first.iter().zip(second).any(|(a, b)| a + b > 1.0)
    {
        return Err(invalid_arg(
            "stopping probabilities must lie in [0, 1] with per-buyer sums <= 1",
        ));
    }
    let p = pair_count(n);
    let mut values = vec![0.0; 2 * p + 1];
    for i in 1..=n {
        let mut remaining = 1.0;
        for j in i..=n {
            let reach = remaining / j as f64;
            let x = first[j - 1] * reach;
            let y = second[j - 1] * reach;
            values[pair_index(n, i, j)] = x;
            values[p + pair_index(n, i, j)] = y;
            remaining -= x + y;
        }
    }
    let nf = n as f64;
    let (mut p1, mut p2) = (0.0, 0.0);
    for i in 1..=n {
        for j in i..=n {
            let jf = j as f64;
            let (x, y) = (values[pair_index(n, i, j)], values[p + pair_index(n, i, j)]);
            p1 += jf / (nf * (nf + 1.0)) * x;
            p2 += (jf * (nf - jf) * x + jf * (jf - 1.0) * y) / (nf * nf * (nf + 1.0));
        }
    }
    values[2 * p] = (2.0 * p1).min(1.5 * (p1 + p2));
    let lp = build_weak_primal(n)?;
    Ok(PrimalSolution::from_values(
        PrimalKind::Weak,
        n,
        &lp,
        &values,
        0,
    ))
}
