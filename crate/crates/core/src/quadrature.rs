//! Composite Gauss–Legendre quadrature in one and two dimensions.
//!
//! The 2-D rule integrates `∫_a^b ds ∫_{lo(s)}^{hi(s)} f(s, t) dt`. Inner
//! limits may depend on `s` (triangular regions bounded by `t = s`); each
//! inner interval is mapped onto its own panels, which is the same as
//! mapping the triangle onto a square. Callers split regions at every kink
//! of the integrand so that each panel sees a smooth function.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Result, SpvtError};

/// Points per panel.
pub const DEFAULT_ORDER: usize = 12;
const MAX_PANELS: usize = 512;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_order.
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule of [`DEFAULT_ORDER`] points.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Single-panel estimate on `[a, b]`.
    pub fn panel<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// `panels` equal panels on `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        if b == a {
            return 0.0;
        }
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                let hi = if k + 1 == panels { b } else { lo + h };
                self.panel(&mut f, lo, hi)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_a^b f`, doubling the panel count until two successive estimates
/// differ by less than `tol`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = GaussLegendre::standard();
    let mut panels = 1;
    let mut prev = rule.composite(&mut f, a, b, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = rule.composite(&mut f, a, b, panels);
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(SpvtError::Numeric(format!(
        "1-D quadrature on [{a}, {b}] did not reach {tol:e}"
    )))
}

fn composite_2d<F, L, H>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    lo: &L,
    hi: &H,
    panels: usize,
) -> f64
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    rule.composite(
        |s| {
            let (l, h) = (lo(s), hi(s));
            if h <= l {
                0.0
            } else {
                rule.composite(|t| f(s, t), l, h, panels)
            }
        },
        a,
        b,
        panels,
    )
}

/// `∫_a^b ds ∫_{lo(s)}^{hi(s)} f(s, t) dt` with panel doubling in both
/// directions until successive estimates differ by less than `tol`.
/// Empty ranges (`b <= a`) integrate to zero.
pub fn integrate_2d<F, L, H>(f: F, a: f64, b: f64, lo: L, hi: H, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let rule = GaussLegendre::standard();
    let mut panels = 1;
    let mut prev = composite_2d(rule, &f, a, b, &lo, &hi, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = composite_2d(rule, &f, a, b, &lo, &hi, panels);
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(SpvtError::Numeric(format!(
        "2-D quadrature on s in [{a}, {b}] did not reach {tol:e}"
    )))
}

/// `(1 - t)^k` computed as `exp(k ln(1 - t))`, with `t = 1` mapped to 0 for
/// `k > 0`. Stays accurate for exponents in the thousands.
pub fn one_minus_pow(t: f64, k: i64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if t >= 1.0 {
        return if k > 0 { 0.0 } else { f64::INFINITY };
    }
    (k as f64 * (-t).ln_1p()).exp()
}
