use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use spvt_core::exact::{
    alg3_pi_finite, alg3_ratio, delta_limit, delta_limit_quadrature, delta_mu, optimize_thresholds,
    Alg3ExactReport, Objective,
};
use spvt_core::lp::{
    solve_primal, strong_dual_certificate, verify_dual_feasibility, weak_dual_certificate,
    CertificateRef, PrimalKind,
};
use spvt_core::montecarlo::simulate;
use spvt_core::oracle::{alg2_exact_weak_ratio, enumerate_alg2_exact, enumerate_weak_opt_exact};
use spvt_core::{gen_instance, ExactInstance, Family, Instance, PolicySpec, SpvtError, Thresholds};

use crate::cli::{
    CertifyCommand, Command, ExactCommand, LpCommand, OptimizeCommand, OracleCommand,
    ReportCommand, SimulateArgs,
};

/// Tolerance for the dual feasibility check reported by `certify`.
const RESIDUAL_TOL: f64 = 1e-12;
const CITED_W1: f64 = 0.970659;
const CITED_W2: f64 = 0.029341;
const CITED_UPPER: (f64, f64) = (0.296151, 0.805018);

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => run_simulate(args),
        Command::Exact(c) => run_exact(c),
        Command::Certify(c) => run_certify(c),
        Command::Lp(LpCommand::Solve { which, n, out }) => {
            let kind: PrimalKind = which.parse()?;
            let sol = solve_primal(kind, n)?;
            println!(
                "{which} primal, n = {n}: objective = {:.12}, max violation = {:.3e}, pivots = {}",
                sol.objective_value, sol.max_violation, sol.pivots
            );
            emit(out.out, &sol)
        }
        Command::Optimize(OptimizeCommand::Thresholds {
            objective,
            grid,
            out,
        }) => {
            let objective: Objective = objective.parse()?;
            let r = optimize_thresholds(objective, grid)?;
            println!(
                "{objective}: value = {:.6} at t1 = {:.6}, t2 = {:.6} (grid {grid}: {:.6} at ({:.4}, {:.4}))",
                r.value, r.th.t1, r.th.t2, r.grid_value, r.grid_best.t1, r.grid_best.t2
            );
            emit(out.out, &r)
        }
        Command::Oracle(c) => run_oracle(c),
        Command::Report(ReportCommand::Constants { out }) => run_constants(out.out),
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}

fn write_json<T: serde::Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn emit<T: serde::Serialize + ?Sized>(out: Option<PathBuf>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json(&path, value),
        None => Ok(()),
    }
}

/// Reads `source` as an instance file if it exists, otherwise as an inline
/// family such as `flat_k:n=10,k=3`.
fn load_instance(source: &str) -> Result<Instance> {
    if Path::new(source).is_file() {
        let text =
            std::fs::read_to_string(source).with_context(|| format!("cannot read {source}"))?;
        return Ok(spvt_core::model::InstanceFile::from_json(&text)?.to_instance()?);
    }
    Ok(gen_instance(parse_family(source)?)?)
}

fn load_exact_instance(source: &str) -> Result<ExactInstance> {
    if Path::new(source).is_file() {
        let text =
            std::fs::read_to_string(source).with_context(|| format!("cannot read {source}"))?;
        return Ok(ExactInstance::from_json(&text)?);
    }
    Ok(ExactInstance::from_instance(&gen_instance(parse_family(
        source,
    )?)?)?)
}

fn parse_family(source: &str) -> Result<Family> {
    source.parse::<Family>().map_err(|e| {
        SpvtError::InvalidArgument(format!(
            "{source:?} is neither a readable file nor a family ({e})"
        ))
        .into()
    })
}

fn thresholds(t1: Option<f64>, t2: Option<f64>) -> Result<Option<Thresholds>> {
    match (t1, t2) {
        (Some(a), Some(b)) => Ok(Some(Thresholds::new(a, b)?)),
        (None, None) => Ok(None),
        _ => Err(SpvtError::InvalidArgument("--t1 and --t2 go together".into()).into()),
    }
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let policy = PolicySpec::parse(&a.policy, thresholds(a.t1, a.t2)?)?;
    let instance = load_instance(&a.instance)?;
    let r = simulate(&policy, &instance, a.trials, a.seed, a.workers)?;
    println!(
        "policy {} on n = {}, mu = {}, {} trials, seed {}",
        r.policy, r.n, r.mu, r.trials, r.seed
    );
    println!(
        "  mean welfare   {:.6} +- {:.6}",
        r.mean_alg_welfare, r.se_alg_welfare
    );
    println!(
        "  weak benchmark {:.6} +- {:.6}",
        r.mean_weak_opt, r.se_weak_opt
    );
    println!("  strong benchmark {:.6}", r.strong_opt);
    println!(
        "  ratio strong {:.6}, ratio weak {:.6}",
        r.ratio_strong, r.ratio_weak
    );
    for (agent, f) in &r.holder_freq {
        let who = match *agent {
            0 => "intermediary".to_string(),
            a if a == r.n + 1 => "seller".to_string(),
            a => format!("buyer rank {a}"),
        };
        println!("  holder {who:>14}: {f:.6}");
    }
    write_json(&a.out, &r)
}

fn run_exact(c: ExactCommand) -> Result<()> {
    match c {
        ExactCommand::Delta { mu, out } => {
            let r = delta_mu(mu)?;
            println!(
                "delta_{mu} = {:.12} (alpha {:.12}, beta {:.12}, gamma {:.12})",
                r.delta, r.alpha, r.beta, r.gamma
            );
            emit(out.out, &r)
        }
        ExactCommand::Alg3 {
            n,
            t1,
            t2,
            i,
            csv,
            out,
        } => {
            let th = Thresholds::new(t1, t2)?;
            if let Some(i) = i {
                if i < 1 || i > n {
                    return Err(
                        SpvtError::InvalidArgument(format!("--i must lie in 1..={n}")).into(),
                    );
                }
                let p = alg3_pi_finite(i, n, th)?;
                println!("p_{i} = {p:.12} (n = {n}, t1 = {t1}, t2 = {t2})");
                return emit(out.out, &json!({ "n": n, "i": i, "th": th, "p_i": p }));
            }
            let r = Alg3ExactReport::compute(n, th)?;
            for (k, p) in r.p.iter().enumerate() {
                println!("p_{} = {p:.12}", k + 1);
            }
            println!(
                "sum = {:.12}, sale probability = {:.12}, p1 limit = {:.12}, p2 limit = {:.12}, ratio = {:.6}",
                r.p.iter().sum::<f64>(),
                r.sale_prob,
                r.p1_limit,
                r.p2_limit,
                r.ratio
            );
            if let Some(path) = csv {
                write_file(&path, |w| Ok(r.write_csv(w)?))?;
            }
            emit(out.out, &r)
        }
        ExactCommand::Limits { out } => {
            let closed = delta_limit();
            let quad = delta_limit_quadrature()?;
            println!(
                "4e^2/(e^2+1)  = {:.10} (quadrature {:.10})",
                1.0 / closed,
                1.0 / quad
            );
            println!("(e^2+1)/(4e^2) = {closed:.10} (quadrature {quad:.10})");
            println!("agreement: {:.3e}", (closed - quad).abs());
            emit(
                out.out,
                &json!({
                    "strong_ratio_closed_form": 1.0 / closed,
                    "strong_ratio_quadrature": 1.0 / quad,
                    "delta_limit_closed_form": closed,
                    "delta_limit_quadrature": quad,
                    "abs_difference": (closed - quad).abs(),
                }),
            )
        }
    }
}

fn print_certificate(
    summary: &spvt_core::lp::CertificateSummary,
    check: &spvt_core::lp::ResidualReport,
) {
    println!("n = {}, objective = {:.9}", summary.n, summary.objective);
    println!("j* = {}, j** = {:?}", summary.j_star, summary.j_double_star);
    println!(
        "min slack = {:.3e} at {:?}, violations = {} (tolerance {:.0e})",
        check.min_slack, check.argmin, check.violations, check.tolerance
    );
}

fn run_certify(c: CertifyCommand) -> Result<()> {
    let (summary, check) = match c {
        CertifyCommand::Strong { n, csv, out } => {
            let cert = strong_dual_certificate(n)?;
            let check = verify_dual_feasibility(CertificateRef::Strong(&cert), RESIDUAL_TOL);
            if let Some(path) = csv {
                write_file(&path, |w| Ok(cert.write_csv(w)?))?;
            }
            let summary = cert.summary();
            emit(
                out.out,
                &json!({ "certificate": summary, "verification": check }),
            )?;
            (summary, check)
        }
        CertifyCommand::Weak {
            n,
            w1,
            w2,
            csv,
            out,
        } => {
            let cert = weak_dual_certificate(n, w1, w2)?;
            let check = verify_dual_feasibility(CertificateRef::Weak(&cert), RESIDUAL_TOL);
            if let Some(path) = csv {
                write_file(&path, |w| Ok(cert.write_csv(w)?))?;
            }
            let summary = cert.summary();
            emit(
                out.out,
                &json!({ "certificate": summary, "verification": check }),
            )?;
            (summary, check)
        }
    };
    print_certificate(&summary, &check);
    Ok(())
}

fn run_oracle(c: OracleCommand) -> Result<()> {
    match c {
        OracleCommand::Weakopt { instance, out } => {
            let inst = load_exact_instance(&instance)?;
            let v = enumerate_weak_opt_exact(&inst)?;
            let f = spvt_core::oracle::Fraction::from(&v);
            println!("{}", f.exact);
            println!("~ {:.12}", f.approx);
            emit(out.out, &json!({ "n": inst.n(), "weak_opt": f }))
        }
        OracleCommand::Alg2 { instance, out } => {
            let inst = load_exact_instance(&instance)?;
            let d = enumerate_alg2_exact(&inst)?.to_output();
            println!(
                "n = {}, mu = {}, {} orders, coin used on {}",
                d.n, d.mu, d.orders, d.coin_orders
            );
            for (a, p) in d.holder_prob.iter().enumerate() {
                println!("p_{a} = {} (~ {:.12})", p.exact, p.approx);
            }
            println!(
                "expected welfare = {} (~ {:.12})",
                d.expected_welfare.exact, d.expected_welfare.approx
            );
            emit(out.out, &d)
        }
    }
}

fn run_constants(out: Option<PathBuf>) -> Result<()> {
    let quad = delta_limit_quadrature()?;
    let upper = Thresholds::new(CITED_UPPER.0, CITED_UPPER.1)?;
    let alg2_family =
        ExactInstance::from_instance(&gen_instance(Family::Geometric { n: 5, ratio: 0.5 })?)?;
    let alg2_ratio = alg2_exact_weak_ratio(&alg2_family)?
        .ok_or_else(|| SpvtError::Numeric("coin-flip policy earned nothing".into()))?;
    let lower = optimize_thresholds(Objective::LowerFamily, 1e-2)?;
    let weak = weak_dual_certificate(2_000_000, CITED_W1, CITED_W2)?;
    let rows: Vec<(&str, f64, f64)> = vec![
        ("strong ratio 4e^2/(e^2+1)", 3.523188, 1.0 / quad),
        ("strong LP limit (e^2+1)/(4e^2)", 0.283834, quad),
        (
            "coin-flip policy weak ratio",
            2.0,
            spvt_core::oracle::Fraction::from(&alg2_ratio).approx,
        ),
        (
            "two-threshold ratio at (0.296151, 0.805018)",
            1.83683,
            alg3_ratio(upper).ratio,
        ),
        ("two-threshold lower-family optimum", 1.76239, lower.value),
        ("weak dual objective, n = 2e6", 0.567411, weak.objective),
    ];
    println!(
        "{:<46} {:>12} {:>14} {:>10}",
        "constant", "reference", "computed", "abs diff"
    );
    for (name, reference, computed) in &rows {
        println!(
            "{name:<46} {reference:>12} {computed:>14.8} {:>10.2e}",
            (computed - reference).abs()
        );
    }
    let table: Vec<Value> = rows
        .iter()
        .map(|(name, reference, computed)| json!({ "name": name, "reference": reference, "computed": computed }))
        .collect();
    emit(out, &table)
}
