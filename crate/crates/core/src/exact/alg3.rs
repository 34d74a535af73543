//! The two-threshold policy on instances with a zero-priced seller.
//!
//! For finite `n`, the probability `p_i` that buyer rank `i` ends with the
//! item is a double integral over the seller time `s` and the buyer time
//! `t`. The integration domain splits into five regions bounded by
//! `t1`, `t2` and the diagonal `t = s`:
//!
//! | region | s range      | t range      |
//! |--------|--------------|--------------|
//! | A      | `[0, t1]`    | `[t1, t2]`   |
//! | B      | `[t1, t2]`   | `[s, t2]`    |
//! | C      | `[0, t1]`    | `[t2, 1]`    |
//! | D      | `[t1, t2]`   | `[t2, 1]`    |
//! | E      | `[t2, 1]`    | `[s, 1]`     |
//!
//! `i (i+1) p_i` is written as the sum of eight terms `k = 1..8`, each the
//! sum of an `n`-free part `beta_k1(i)` and a remainder `beta_k2(i, n)`.
//! Terms 1 to 5 live on regions A to E. Terms 6, 7 and 8 cover sales to a
//! buyer that is second best so far, on regions C, D and E.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid_arg, Result, SpvtError};
use crate::model::Thresholds;
use crate::quadrature::{integrate_2d, one_minus_pow};

const QUAD_TOL: f64 = 1e-11;

/// Asymptotic quantities that do not need `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alg3Limits {
    pub p1_limit: f64,
    pub p2_limit: f64,
    pub sale_prob: f64,
    /// `t1 = 0`: the `t1^2 ln(t2/t1)` term was replaced by its limit 0.
    pub log_term_extended: bool,
}

fn log_term(th: Thresholds) -> f64 {
    if th.t1 == 0.0 {
        0.0
    } else {
        6.0 * th.t1 * th.t1 * (th.t2 / th.t1).ln()
    }
}

/// `lim_{n -> inf} p_1`.
pub fn alg3_p1_limit(th: Thresholds) -> f64 {
    let (t1, t2) = (th.t1, th.t2);
    (2.0 + t1 * t1 * (3.0 - 6.0 * t2) + (3.0 - 2.0 * t2) * t2 * t2 + log_term(th)) / 12.0
}

/// `lim_{n -> inf} p_2`.
pub fn alg3_p2_limit(th: Thresholds) -> f64 {
    let (t1, t2) = (th.t1, th.t2);
    (2.0 + 8.0 * t1.powi(3)
        + t1 * t1 * (3.0 - 12.0 * t2)
        + (3.0 - 4.0 * t2) * t2 * t2
        + log_term(th))
        / 12.0
}

/// Probability that some buyer ends with the item, for every `n >= 2`.
pub fn alg3_sale_prob(th: Thresholds) -> f64 {
    let (t1, t2) = (th.t1, th.t2);
    1.0 - (1.0 / 3.0 + t2.powi(3) / 6.0 + t1 * t1 * t2 / 2.0)
}

pub fn alg3_limits(th: Thresholds) -> Alg3Limits {
    Alg3Limits {
        p1_limit: alg3_p1_limit(th),
        p2_limit: alg3_p2_limit(th),
        sale_prob: alg3_sale_prob(th),
        log_term_extended: th.t1 == 0.0,
    }
}

/// Asymptotic weak ratio bound, computed two ways: from the spike instance
/// (`1 / (2 p_1)`) and from the all-equal instance (`1 / sale_prob`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alg3Ratio {
    pub via_p1: f64,
    pub via_sale: f64,
    pub ratio: f64,
}

pub fn alg3_ratio(th: Thresholds) -> Alg3Ratio {
    let via_p1 = 1.0 / (2.0 * alg3_p1_limit(th));
    let via_sale = 1.0 / alg3_sale_prob(th);
    Alg3Ratio {
        via_p1,
        via_sale,
        ratio: via_p1.max(via_sale),
    }
}

/// Which half of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `beta_k1(i)`, independent of `n`.
    Limit,
    /// `beta_k2(i, n)`.
    Remainder,
}

#[derive(Clone, Copy)]
enum Region {
    A,
    B,
    C,
    D,
    E,
}

fn region_of(k: usize) -> Region {
    match k {
        1 => Region::A,
        2 => Region::B,
        3 | 6 => Region::C,
        4 | 7 => Region::D,
        5 | 8 => Region::E,
        _ => unreachable!("term index {k}"),
    }
}

/// `c (1 - t)^e`, zero whenever `c` is zero so that negative exponents at
/// `n = 1` or `i = 1` never meet `t = 1`.
fn scaled_pow(c: f64, t: f64, e: i64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * one_minus_pow(t, e)
    }
}

/// `beta_k1(i)` or `beta_k2(i, n)` by quadrature over the term's region.
pub fn beta_term(k: usize, part: Part, i: usize, n: usize, th: Thresholds) -> Result<f64> {
    if !(1..=8).contains(&k) {
        return Err(invalid_arg(format!("term index {k} must lie in 1..=8")));
    }
    if i < 1 || i > n {
        return Err(invalid_arg(format!("buyer rank {i} must lie in 1..={n}")));
    }
    let (t1, t2) = (th.t1, th.t2);
    let (ii, nn) = (i as i64, n as i64);
    let weight = (i * (i + 1)) as f64;
    // Weight in s and t, as a function of the region's own coordinates.
    let integrand = move |s: f64, t: f64| -> f64 {
        let v = match (part, k) {
            (Part::Limit, 1) => one_minus_pow(t, ii - 1) * t1 / t,
            (Part::Limit, 2) => one_minus_pow(t, ii - 1) * s / t,
            (Part::Limit, 3) => one_minus_pow(t, ii - 1) * t1 * t2 / (t * t),
            (Part::Limit, 4) => one_minus_pow(t, ii - 1) * s * t2 / (t * t),
            (Part::Limit, 5) => one_minus_pow(t, ii - 1) * s * s / (t * t),
            (Part::Limit, 6) => scaled_pow((ii - 1) as f64, t, ii - 2) * t1 * t2 / t,
            (Part::Limit, 7) => scaled_pow((ii - 1) as f64, t, ii - 2) * s * t2 / t,
            (Part::Limit, 8) => scaled_pow((ii - 1) as f64, t, ii - 2) * s * s / t,
            (Part::Remainder, 1) => one_minus_pow(t, nn - 1) * (1.0 - t1 / t),
            (Part::Remainder, 2) => one_minus_pow(t, nn - 1) * (1.0 - s / t),
            (Part::Remainder, 3) => one_minus_pow(t, nn - 1) * (1.0 - t1 * t2 / (t * t)),
            (Part::Remainder, 4) => one_minus_pow(t, nn - 1) * (1.0 - s * t2 / (t * t)),
            (Part::Remainder, 5) => one_minus_pow(t, nn - 1) * (1.0 - s * s / (t * t)),
            (Part::Remainder, 6) => t1 * scaled_pow((nn - 1) as f64, t, nn - 2) * (1.0 - t2 / t),
            (Part::Remainder, 7) => s * scaled_pow((nn - 1) as f64, t, nn - 2) * (1.0 - t2 / t),
            (Part::Remainder, 8) => s * scaled_pow((nn - 1) as f64, t, nn - 2) * (1.0 - s / t),
            _ => unreachable!(),
        };
        weight * v
    };
    let v = match region_of(k) {
        Region::A => integrate_2d(integrand, 0.0, t1, |_| t1, |_| t2, QUAD_TOL),
        Region::B => integrate_2d(integrand, t1, t2, |s| s, |_| t2, QUAD_TOL),
        Region::C => integrate_2d(integrand, 0.0, t1, |_| t2, |_| 1.0, QUAD_TOL),
        Region::D => integrate_2d(integrand, t1, t2, |_| t2, |_| 1.0, QUAD_TOL),
        Region::E => integrate_2d(integrand, t2, 1.0, |s| s, |_| 1.0, QUAD_TOL),
    }?;
    if !v.is_finite() {
        return Err(SpvtError::Numeric(format!(
            "term {k} at i={i}, n={n} is not finite"
        )));
    }
    Ok(v)
}

/// `p_i` for finite `n`.
pub fn alg3_pi_finite(i: usize, n: usize, th: Thresholds) -> Result<f64> {
    if n < 1 || i < 1 || i > n {
        return Err(invalid_arg(format!("need 1 <= i <= n, got i={i}, n={n}")));
    }
    let mut total = 0.0;
    for k in 1..=8 {
        total += beta_term(k, Part::Limit, i, n, th)? + beta_term(k, Part::Remainder, i, n, th)?;
    }
    Ok(total / (i * (i + 1)) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alg3ExactReport {
    pub n: usize,
    pub th: Thresholds,
    /// `p[i - 1] = p_i`.
    pub p: Vec<f64>,
    pub p1_limit: f64,
    pub p2_limit: f64,
    pub sale_prob: f64,
    pub ratio: f64,
    pub log_term_extended: bool,
}

impl Alg3ExactReport {
    pub fn compute(n: usize, th: Thresholds) -> Result<Self> {
        let p = (1..=n)
            .map(|i| alg3_pi_finite(i, n, th))
            .collect::<Result<Vec<_>>>()?;
        let limits = alg3_limits(th);
        Ok(Alg3ExactReport {
            n,
            th,
            p,
            p1_limit: limits.p1_limit,
            p2_limit: limits.p2_limit,
            sale_prob: limits.sale_prob,
            ratio: alg3_ratio(th).ratio,
            log_term_extended: limits.log_term_extended,
        })
    }

    /// Columns `i, p_i, f_i` with `f_i = i (i+1) p_i`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| SpvtError::Numeric(format!("csv output failed: {e}"));
        w.write_record(["i", "p_i", "f_i"]).map_err(io)?;
        for (idx, p) in self.p.iter().enumerate() {
            let i = idx + 1;
            let f = (i * (i + 1)) as f64 * p;
            w.write_record([i.to_string(), p.to_string(), f.to_string()])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| SpvtError::Numeric(format!("csv output failed: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnimodalityReport {
    pub n: usize,
    pub th: Thresholds,
    /// `f[i - 1] = f(i, n)`.
    pub f: Vec<f64>,
    /// `beta_k1[k - 1][i - 1]`.
    pub beta_k1: Vec<Vec<f64>>,
    /// `beta_k2[k - 1][i - 1]`.
    pub beta_k2: Vec<Vec<f64>>,
    /// `f(1) < f(2) > f(3) > ... > f(n)`.
    pub unimodal: bool,
}

impl UnimodalityReport {
    /// `sum_k beta_k1(i)`.
    pub fn limit_sum(&self, i: usize) -> f64 {
        self.beta_k1.iter().map(|row| row[i - 1]).sum()
    }
}

pub fn unimodality_f(n: usize, th: Thresholds) -> Result<UnimodalityReport> {
    if n < 2 {
        return Err(invalid_arg("unimodality needs n >= 2"));
    }
    let table = |part| -> Result<Vec<Vec<f64>>> {
        (1..=8)
            .map(|k| (1..=n).map(|i| beta_term(k, part, i, n, th)).collect())
            .collect()
    };
    let beta_k1 = table(Part::Limit)?;
    let beta_k2 = table(Part::Remainder)?;
    let f: Vec<f64> = (0..n)
        .map(|i| (0..8).map(|k| beta_k1[k][i] + beta_k2[k][i]).sum())
        .collect();
    let unimodal = f[0] < f[1] && f[1..].windows(2).all(|w| w[0] > w[1]);
    Ok(UnimodalityReport {
        n,
        th,
        f,
        beta_k1,
        beta_k2,
        unimodal,
    })
}

/// `sum_k beta_k1(i)` without building a whole report.
pub fn beta_limit_sum(i: usize, th: Thresholds) -> Result<f64> {
    (1..=8).map(|k| beta_term(k, Part::Limit, i, i, th)).sum()
}
