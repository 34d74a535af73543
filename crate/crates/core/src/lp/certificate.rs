//! Explicit dual solutions bounding the two primal programs.
//!
//! Both duals have one pair of constraints per `(i, j)`, but the variables
//! used here depend on `j` only, so every constraint reduces to a
//! per-`j` check and each objective to `sum_j j * (value at j)`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{invalid_arg, Result, SpvtError};
use crate::sum::CompensatedSum;

/// Dual of the strong program, from suffix harmonic sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongDualCertificate {
    pub n: usize,
    /// `a[j - 1] = (1 - sum_{k=j}^{n-1} 1/k) / ((n+1) n)`.
    pub a: Vec<f64>,
    /// `max(a, 0)`, the dual values.
    pub y_pos: Vec<f64>,
    pub j_star: usize,
    pub objective: f64,
    pub min_residual: f64,
}

pub fn strong_dual_certificate(n: usize) -> Result<StrongDualCertificate> {
    if n < 1 {
        return Err(invalid_arg("n must be at least 1"));
    }
    let scale = 1.0 / ((n + 1) as f64 * n as f64);
    let mut a = vec![0.0; n];
    let mut harmonic = CompensatedSum::new();
    for j in (1..=n).rev() {
        if j < n {
            harmonic.add(1.0 / j as f64);
        }
        a[j - 1] = (1.0 - harmonic.value()) * scale;
    }
    let y_pos: Vec<f64> = a.iter().map(|&v| v.max(0.0)).collect();
    let objective = y_pos
        .iter()
        .enumerate()
        .map(|(k, &y)| (k + 1) as f64 * y)
        .collect::<CompensatedSum>()
        .value();
    let j_star = (1.0 + (n as f64 - 1.0) / std::f64::consts::E).ceil() as usize;
    // Dual constraint j y_j + sum_{k>j} y_k >= j / ((n+1) n), by one suffix pass.
    let mut suffix = 0.0;
    let mut min_residual = f64::INFINITY;
    for j in (1..=n).rev() {
        let r = j as f64 * y_pos[j - 1] + suffix - j as f64 * scale;
        min_residual = min_residual.min(r);
        suffix += y_pos[j - 1];
    }
    Ok(StrongDualCertificate {
        n,
        a,
        y_pos,
        j_star,
        objective,
        min_residual,
    })
}

/// Dual of the weak program, from the backward two-loop construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakDualCertificate {
    pub n: usize,
    pub w1: f64,
    pub w2: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Where the first loop stopped (`beta` turned negative).
    pub j_star: usize,
    /// Where the second loop stopped (`alpha` turned negative), if it did.
    pub j_double_star: Option<usize>,
    pub objective: f64,
    pub min_residual_u: f64,
    pub min_residual_v: f64,
}

fn check_weights(w1: f64, w2: f64) -> Result<()> {
    if !(w1.is_finite()
        && w2.is_finite()
        && w1 >= 0.0
        && w2 >= 0.0
        && (w1 + w2 - 1.0).abs() <= 1e-9)
    {
        return Err(invalid_arg(format!(
            "weights must be non-negative and sum to 1, got {w1} and {w2}"
        )));
    }
    Ok(())
}

pub fn weak_dual_certificate(n: usize, w1: f64, w2: f64) -> Result<WeakDualCertificate> {
    if n < 2 {
        return Err(invalid_arg("n must be at least 2"));
    }
    check_weights(w1, w2)?;
    let nf = n as f64;
    let base = nf * nf + nf;
    let rhs_u = |j: f64| 2.0 * j / base * w1 + 3.0 * j * (2.0 * nf - j) / (2.0 * nf * base) * w2;
    let rhs_v = |j: f64| 3.0 * j * (j - 1.0) / (2.0 * nf * base) * w2;

    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut s = 0.0;
    let mut j_star = 1;
    for j in (1..=n).rev() {
        let jf = j as f64;
        alpha[j - 1] = (rhs_u(jf) - s) / jf;
        let b = (rhs_v(jf) - s) / jf;
        if b < 0.0 {
            beta[j - 1] = 0.0;
            j_star = j;
            break;
        }
        beta[j - 1] = b;
        s += alpha[j - 1] + b;
    }
    // The second loop reassigns alpha at j_star from the same s.
    let mut j_double_star = None;
    for j in (1..=j_star).rev() {
        let jf = j as f64;
        let a = (rhs_u(jf) - s) / jf;
        if a < 0.0 {
            alpha[j - 1] = 0.0;
            j_double_star = Some(j);
            break;
        }
        alpha[j - 1] = a;
        s += a;
    }

    let objective = alpha
        .iter()
        .zip(&beta)
        .enumerate()
        .map(|(k, (a, b))| (k + 1) as f64 * (a + b))
        .collect::<CompensatedSum>()
        .value();
    let mut suffix = 0.0;
    let (mut min_u, mut min_v) = (f64::INFINITY, f64::INFINITY);
    for j in (1..=n).rev() {
        let jf = j as f64;
        min_u = min_u.min(jf * alpha[j - 1] + suffix - rhs_u(jf));
        min_v = min_v.min(jf * beta[j - 1] + suffix - rhs_v(jf));
        suffix += alpha[j - 1] + beta[j - 1];
    }
    Ok(WeakDualCertificate {
        n,
        w1,
        w2,
        alpha,
        beta,
        j_star,
        j_double_star,
        objective,
        min_residual_u: min_u,
        min_residual_v: min_v,
    })
}

/// One dual constraint family checked by [`verify_dual_feasibility`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Strong dual constraint at `j`.
    Dual,
    /// Weak dual constraint paired with `x` at `j`.
    U,
    /// Weak dual constraint paired with `y` at `j`.
    V,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub min_slack: f64,
    pub argmin: (ConstraintKind, usize),
    /// Constraints with slack below `-tolerance`.
    pub violations: usize,
    pub tolerance: f64,
    /// The objective recomputed from the dual values.
    pub objective: f64,
}

impl ResidualReport {
    pub fn feasible(&self) -> bool {
        self.violations == 0
    }
}

/// Either certificate kind.
#[derive(Debug, Clone, Copy)]
pub enum CertificateRef<'a> {
    Strong(&'a StrongDualCertificate),
    Weak(&'a WeakDualCertificate),
}

struct Tracker {
    min: f64,
    argmin: (ConstraintKind, usize),
    violations: usize,
    tol: f64,
}

impl Tracker {
    fn new(tol: f64) -> Self {
        Tracker {
            min: f64::INFINITY,
            argmin: (ConstraintKind::Dual, 0),
            violations: 0,
            tol,
        }
    }

    /// A dual constraint: tracked for the minimum and counted if violated.
    fn slack(&mut self, slack: f64, kind: ConstraintKind, j: usize) {
        if slack < self.min || slack.is_nan() {
            self.min = slack;
            self.argmin = (kind, j);
        }
        self.check(slack >= -self.tol);
    }

    /// A side condition: only counted if it fails.
    fn check(&mut self, ok: bool) {
        if !ok {
            self.violations += 1;
        }
    }
}

/// Recomputes every dual constraint from the stored dual values, using
/// the printed right-hand sides directly rather than the construction's
/// own arithmetic. Sign conditions and, for the strong certificate, the
/// defining sequence `a` are checked too and count as violations.
pub fn verify_dual_feasibility(cert: CertificateRef<'_>, tolerance: f64) -> ResidualReport {
    let mut tr = Tracker::new(tolerance);
    let objective;
    match cert {
        CertificateRef::Strong(c) => {
            let n = c.n;
            let nf = n as f64;
            let scale = 1.0 / ((nf + 1.0) * nf);
            let mut tail_harmonic = 0.0;
            let mut lhs_tail = vec![0.0; n + 1];
            for j in (1..=n).rev() {
                let y = c.y_pos[j - 1];
                tr.check(y >= 0.0);
                tr.check(y == c.a[j - 1].max(0.0));
                if j < n {
                    tail_harmonic += 1.0 / j as f64;
                }
                tr.check((c.a[j - 1] - (1.0 - tail_harmonic) * scale).abs() <= tolerance);
                lhs_tail[j - 1] = lhs_tail[j] + y;
            }
            for j in 1..=n {
                let jf = j as f64;
                let lhs = jf * c.y_pos[j - 1] + lhs_tail[j];
                tr.slack(lhs - jf * scale, ConstraintKind::Dual, j);
            }
            objective = (1..=n).map(|j| j as f64 * c.y_pos[j - 1]).sum();
        }
        CertificateRef::Weak(c) => {
            let n = c.n;
            let nf = n as f64;
            tr.check((c.w1 + c.w2 - 1.0).abs() <= 1e-9 && c.w1 >= 0.0 && c.w2 >= 0.0);
            let mut lhs_tail = vec![0.0; n + 1];
            for j in (1..=n).rev() {
                lhs_tail[j - 1] = lhs_tail[j] + c.alpha[j - 1] + c.beta[j - 1];
            }
            for j in 1..=n {
                let jf = j as f64;
                tr.check(c.alpha[j - 1] >= 0.0 && c.beta[j - 1] >= 0.0);
                let u_rhs = 2.0 * jf / (nf * nf + nf) * c.w1
                    + 3.0 * jf * (2.0 * nf - jf) / (2.0 * nf * (nf * nf + nf)) * c.w2;
                let v_rhs = 3.0 * jf * (jf - 1.0) / (2.0 * nf * (nf * nf + nf)) * c.w2;
                tr.slack(
                    jf * c.alpha[j - 1] + lhs_tail[j] - u_rhs,
                    ConstraintKind::U,
                    j,
                );
                tr.slack(
                    jf * c.beta[j - 1] + lhs_tail[j] - v_rhs,
                    ConstraintKind::V,
                    j,
                );
            }
            objective = (1..=n)
                .map(|j| j as f64 * (c.alpha[j - 1] + c.beta[j - 1]))
                .sum();
        }
    }
    ResidualReport {
        min_slack: tr.min,
        argmin: tr.argmin,
        violations: tr.violations,
        tolerance,
        objective,
    }
}

/// Compact machine-readable form of either certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub n: usize,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub j_star: usize,
    pub j_double_star: Option<usize>,
    pub objective: f64,
    pub min_residuals: BTreeMap<String, f64>,
}

/// Largest `n` for which the full per-`j` table may be written.
pub const CSV_DUMP_CAP: usize = 10_000;

impl StrongDualCertificate {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            n: self.n,
            w1: None,
            w2: None,
            j_star: self.j_star,
            j_double_star: None,
            objective: self.objective,
            min_residuals: BTreeMap::from([("dual".to_string(), self.min_residual)]),
        }
    }

    /// Columns `j, a, y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.n).map(|k| {
            [
                (k + 1).to_string(),
                self.a[k].to_string(),
                self.y_pos[k].to_string(),
            ]
        });
        write_table(out, self.n, ["j", "a", "y"], rows)
    }
}

impl WeakDualCertificate {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            n: self.n,
            w1: Some(self.w1),
            w2: Some(self.w2),
            j_star: self.j_star,
            j_double_star: self.j_double_star,
            objective: self.objective,
            min_residuals: BTreeMap::from([
                ("u".to_string(), self.min_residual_u),
                ("v".to_string(), self.min_residual_v),
            ]),
        }
    }

    /// Columns `j, alpha, beta`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.n).map(|k| {
            [
                (k + 1).to_string(),
                self.alpha[k].to_string(),
                self.beta[k].to_string(),
            ]
        });
        write_table(out, self.n, ["j", "alpha", "beta"], rows)
    }
}

fn write_table<W: Write>(
    out: W,
    n: usize,
    header: [&str; 3],
    rows: impl Iterator<Item = [String; 3]>,
) -> Result<()> {
    if n > CSV_DUMP_CAP {
        return Err(SpvtError::SizeLimit {
            what: "certificate table n",
            got: n,
            cap: CSV_DUMP_CAP,
        });
    }
    let io = |e: csv::Error| SpvtError::Numeric(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| SpvtError::Numeric(format!("csv output failed: {e}")))
}
