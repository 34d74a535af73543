//! Threshold analysis: the monotonicity cutoffs and the search for the
//! best `(t1, t2)` pair.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::alg3::{alg3_p1_limit, alg3_p2_limit, alg3_sale_prob};
use crate::error::{invalid_arg, Result, SpvtError};
use crate::model::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityThresholds {
    pub t_star: f64,
    #[serde(rename = "I1")]
    pub i1: u64,
    #[serde(rename = "I2")]
    pub i2: u64,
}

pub fn mono_thresholds(t_star: f64) -> Result<MonotonicityThresholds> {
    if !(t_star > 0.0 && t_star <= 1.0) {
        return Err(invalid_arg(format!(
            "t_star must lie in (0, 1], got {t_star}"
        )));
    }
    let t = t_star;
    let i1 = ((4.0 - 5.0 * t + (t * t - 8.0 * t + 8.0).sqrt()) / (2.0 * t)).ceil();
    let i2 = ((6.0 - 5.0 * t + (t * t - 12.0 * t + 12.0).sqrt()) / (2.0 * t)).ceil();
    Ok(MonotonicityThresholds {
        t_star,
        i1: i1 as u64,
        i2: i2 as u64,
    })
}

/// What the threshold search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// `max(1 / (2 p1), 1 / sale_prob)`: the guaranteed ratio.
    Upper,
    /// `max(1 / (2 p1), (2/3) / (p1 + p2))`: the best ratio any threshold
    /// pair can hope for on the spike and two-spike families.
    LowerFamily,
}

impl Objective {
    pub fn eval(self, th: Thresholds) -> f64 {
        let p1 = alg3_p1_limit(th);
        let other = match self {
            Objective::Upper => alg3_sale_prob(th),
            Objective::LowerFamily => 1.5 * (p1 + alg3_p2_limit(th)),
        };
        if p1 <= 0.0 || other <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 / (2.0 * p1)).max(1.0 / other)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Upper => "upper",
            Objective::LowerFamily => "lowerfamily",
        })
    }
}

impl FromStr for Objective {
    type Err = SpvtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" | "upper_bound" => Ok(Objective::Upper),
            "lowerfamily" | "lower_bound_family" => Ok(Objective::LowerFamily),
            other => Err(invalid_arg(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub objective: Objective,
    pub grid_step: f64,
    pub grid_best: Thresholds,
    pub grid_value: f64,
    pub th: Thresholds,
    pub value: f64,
}

const GOLDEN_TOL: f64 = 1e-10;

/// Minimizer of a unimodal function on `[a, b]`.
fn golden<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid search over `0 <= t1 <= t2 <= 1`, then nested golden-section
/// refinement within two grid steps of the best grid point.
pub fn optimize_thresholds(objective: Objective, grid_step: f64) -> Result<OptimizeResult> {
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(invalid_arg(format!(
            "grid step must lie in (0, 0.5], got {grid_step}"
        )));
    }
    let m = (1.0 / grid_step).round() as usize;
    let at = |k: usize| (k as f64 * grid_step).min(1.0);
    let mut best = (f64::INFINITY, 0, 0);
    for a in 0..=m {
        for b in a..=m {
            let v = objective.eval(Thresholds {
                t1: at(a),
                t2: at(b),
            });
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    let (grid_value, a, b) = best;
    if !grid_value.is_finite() {
        return Err(SpvtError::Numeric(
            "objective is infinite on the whole grid".into(),
        ));
    }
    let grid_best = Thresholds {
        t1: at(a),
        t2: at(b),
    };

    let span = 2.0 * grid_step;
    let (lo1, hi1) = (
        (grid_best.t1 - span).max(0.0),
        (grid_best.t1 + span).min(1.0),
    );
    let inner = |t1: f64| {
        let lo2 = (grid_best.t2 - span).max(t1);
        let hi2 = (grid_best.t2 + span).min(1.0);
        if hi2 <= lo2 {
            return (lo2, objective.eval(Thresholds { t1, t2: lo2 }));
        }
        golden(|t2| objective.eval(Thresholds { t1, t2 }), lo2, hi2)
    };
    let (t1, _) = golden(|t1| inner(t1).1, lo1, hi1);
    let (t2, value) = inner(t1);
    let (th, value) = if value <= grid_value {
        (Thresholds::new(t1, t2)?, value)
    } else {
        (grid_best, grid_value)
    };
    Ok(OptimizeResult {
        objective,
        grid_step,
        grid_best,
        grid_value,
        th,
        value,
    })
}
