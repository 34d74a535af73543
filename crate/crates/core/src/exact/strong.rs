//! Probability that the first policy ends with the best buyer when `mu`
//! buyers beat the seller, split into the three arrival cases.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::quadrature::{integrate_1d, integrate_2d, one_minus_pow};

/// Absolute tolerance handed to each quadrature call.
const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongExactReport {
    pub mu: usize,
    /// Seller arrives before `1/e`.
    pub alpha: f64,
    /// Seller arrives in `[1/e, (e-1)/e]` and the best buyer is the first
    /// buyer after it.
    pub beta: f64,
    /// Seller arrives after `1/e` and the best buyer is first to beat the
    /// best earlier agent.
    pub gamma: f64,
    pub delta: f64,
}

fn q(t: f64, mu: usize) -> f64 {
    one_minus_pow(t, mu as i64 - 1)
}

pub fn delta_mu(mu: usize) -> Result<StrongExactReport> {
    if mu < 1 {
        return Err(invalid_arg("mu must be at least 1"));
    }
    let inv_e = 1.0 / E;
    // The alpha integrand does not depend on s.
    let alpha = inv_e
        * integrate_1d(
            |t| q(t, mu) + (1.0 - q(t, mu)) / (E * t),
            inv_e,
            1.0,
            QUAD_TOL,
        )?;
    let beta = integrate_2d(
        |_, t| q(t, mu),
        inv_e,
        1.0 - inv_e,
        |s| s,
        |_| 1.0,
        QUAD_TOL,
    )?;
    let gamma = integrate_2d(
        |s, t| s * (1.0 - q(t, mu)) / t,
        inv_e,
        1.0,
        |s| s,
        |_| 1.0,
        QUAD_TOL,
    )?;
    Ok(StrongExactReport {
        mu,
        alpha,
        beta,
        gamma,
        delta: alpha + beta + gamma,
    })
}

/// `(e^2 + 1) / (4 e^2)`, the limit of `delta_mu`.
pub fn delta_limit() -> f64 {
    (E * E + 1.0) / (4.0 * E * E)
}

/// The limit evaluated by quadrature of the `mu -> inf` integrands.
pub fn delta_limit_quadrature() -> Result<f64> {
    let inv_e = 1.0 / E;
    let first = inv_e * integrate_1d(|t| 1.0 / (E * t), inv_e, 1.0, QUAD_TOL)?;
    let second = integrate_2d(|s, t| s / t, inv_e, 1.0, |s| s, |_| 1.0, QUAD_TOL)?;
    Ok(first + second)
}

/// Closed form of `delta_mu - delta_{mu+1}`.
pub fn delta_step_closed_form(mu: usize) -> Result<f64> {
    if mu < 1 {
        return Err(invalid_arg("mu must be at least 1"));
    }
    let m = mu as f64;
    // (e-1)^{mu+1} / e^{mu+2} is formed as one power to avoid overflow.
    let ratio = ((E - 1.0) / E).powi(mu as i32 + 1) / E;
    let tail = (2.0 * E + m * E - m) / E.powf(m + 2.0);
    Ok(((m + 1.0 + E) * ratio - tail) / (m * (m + 1.0) * (m + 2.0)))
}
