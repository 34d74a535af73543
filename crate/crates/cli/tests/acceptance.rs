//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. A criterion fails if its check fails or it exceeds its time
//! budget.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spvt_core::exact::{
    alg3_pi_finite, alg3_ratio, alg3_sale_prob, beta_limit_sum, delta_limit,
    delta_limit_quadrature, delta_mu, delta_step_closed_form, mono_thresholds, optimize_thresholds,
    unimodality_f, Objective,
};
use spvt_core::lp::{
    solve_primal, strong_dual_certificate, verify_dual_feasibility, weak_dual_certificate,
    CertificateRef, PrimalKind,
};
use spvt_core::model::parse_rational;
use spvt_core::montecarlo::simulate;
use spvt_core::oracle::{alg2_exact_weak_ratio, enumerate_alg2_exact, enumerate_weak_opt_exact};
use spvt_core::{
    gen_instance, weak_opt_expected_exact, ExactInstance, Family, Instance, PolicySpec, Thresholds,
};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

const UPPER_TH: (f64, f64) = (0.296151, 0.805018);
const LOWER_TH: (f64, f64) = (0.365883, 0.978772);
const MC_TRIALS: u64 = 1_000_000;
const MC_SEED: u64 = 20240601;

fn workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn th(p: (f64, f64)) -> Thresholds {
    Thresholds::new(p.0, p.1).expect("cited thresholds are ordered")
}

fn c1_strong_constant() -> Check {
    let closed = delta_limit();
    let quad = delta_limit_quadrature().map_err(err)?;
    let e2 = std::f64::consts::E.powi(2);
    let ratio_closed = 4.0 * e2 / (e2 + 1.0);
    let d_ratio = (ratio_closed - 1.0 / quad).abs();
    let d_delta = ((e2 + 1.0) / (4.0 * e2) - quad)
        .abs()
        .max((closed - quad).abs());
    ensure(
        d_ratio <= 1e-9 && d_delta <= 1e-9,
        format!("4e^2/(e^2+1) = {ratio_closed:.9}, |closed - quad| = {d_ratio:.1e} (ratio), {d_delta:.1e} (delta)"),
    )
}

fn c2_delta_monotone() -> Check {
    let deltas: Vec<f64> = (1..=201)
        .map(|mu| delta_mu(mu).map(|r| r.delta))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let steps: Vec<f64> = (1..=200)
        .map(delta_step_closed_form)
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let limit = delta_limit();
    // Steps below a few ulps cannot show up as a difference of two doubles;
    // there the exact step carries the strict inequality.
    let resolution = 8.0 * f64::EPSILON * limit;
    let mut resolved = 0;
    let mut decreasing = steps.iter().all(|&s| s > 0.0);
    for mu in 1..200 {
        let diff = deltas[mu - 1] - deltas[mu];
        decreasing &= diff >= 0.0;
        if steps[mu - 1] > resolution {
            decreasing &= diff > 0.0;
            resolved = mu;
        }
    }
    let min = deltas[..200].iter().cloned().fold(f64::INFINITY, f64::min);
    let literal_ok = min >= 0.2838344;
    let mut worst_step = 0.0f64;
    for mu in 1..=30 {
        worst_step = worst_step.max((deltas[mu - 1] - deltas[mu] - steps[mu - 1]).abs());
    }
    ensure(
        decreasing && min >= limit && worst_step <= 1e-9,
        format!(
            "strictly decreasing: {decreasing} (quadrature differences for mu <= {resolved}, exact steps beyond), \
             min delta = {min:.10} >= limit {limit:.10}; literal 0.2838344 bound holds: {literal_ok}; \
             max step error {worst_step:.1e}"
        ),
    )
}

fn c3_alg1_seller() -> Check {
    let inst = gen_instance(Family::SellerSpike { n: 50 }).map_err(err)?;
    let r = simulate(&PolicySpec::Alg1, &inst, MC_TRIALS, MC_SEED, workers()).map_err(err)?;
    let want = (-1.0f64).exp();
    let (p, _) = r.holder(51);
    let sigma = (want * (1.0 - want) / MC_TRIALS as f64).sqrt();
    let z = (p - want) / sigma;
    ensure(
        z.abs() <= 3.0,
        format!("seller frequency {p:.6} vs 1/e = {want:.6} ({z:+.2} sigma)"),
    )
}

fn c4_alg1_best_buyer() -> Check {
    let inst = gen_instance(Family::Geometric { n: 3, ratio: 0.5 }).map_err(err)?;
    let r = simulate(&PolicySpec::Alg1, &inst, MC_TRIALS, MC_SEED, workers()).map_err(err)?;
    if r.mu != 3 {
        return Err(format!("instance has mu = {}, not 3", r.mu));
    }
    let want = delta_mu(3).map_err(err)?.delta;
    let (p, _) = r.holder(1);
    let sigma = (want * (1.0 - want) / MC_TRIALS as f64).sqrt();
    let z = (p - want) / sigma;
    ensure(
        z.abs() <= 3.0,
        format!("best-buyer frequency {p:.6} vs delta_3 = {want:.6} ({z:+.2} sigma)"),
    )
}

fn generator_instances(max_n: usize) -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let mut fams = vec![Family::Spike { n }, Family::SellerSpike { n }];
        fams.extend((0..=n).map(|k| Family::FlatK { n, k }));
        fams.extend([0.25, 0.5, 0.9].map(|ratio| Family::Geometric { n, ratio }));
        for f in fams {
            out.push((
                f.to_string(),
                gen_instance(f).expect("generator parameters are valid"),
            ));
        }
    }
    out
}

fn c5_alg2_exact() -> Check {
    let mut instances = 0;
    let mut ratio_checked = 0;
    for (name, inst) in generator_instances(5) {
        let exact = ExactInstance::from_instance(&inst).map_err(err)?;
        let d = enumerate_alg2_exact(&exact).map_err(err)?;
        for i in 1..=d.mu {
            let want = parse_rational(&format!("1/{}", 2 * i * (i + 1))).map_err(err)?;
            if d.holder_prob[i] != want {
                return Err(format!(
                    "{name}: p_{i} = {} instead of {want}",
                    d.holder_prob[i]
                ));
            }
        }
        if let Some(r) = alg2_exact_weak_ratio(&exact).map_err(err)? {
            if r != parse_rational("2").map_err(err)? {
                return Err(format!("{name}: exact weak ratio {r}"));
            }
            ratio_checked += 1;
        }
        instances += 1;
    }
    ensure(
        ratio_checked > 0,
        format!("p_i = 1/(2i(i+1)) on {instances} instances; ratio exactly 2 on all {ratio_checked} with positive welfare"),
    )
}

fn c6_weak_opt_closed_form() -> Check {
    let mut rng = StdRng::seed_from_u64(6);
    for case in 0..50 {
        let n = rng.gen_range(1..=6);
        let mut price = || {
            parse_rational(&format!(
                "{}/{}",
                rng.gen_range(0..60),
                rng.gen_range(1..13)
            ))
        };
        let buyers = (0..n)
            .map(|_| price())
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let seller = price().map_err(err)?;
        let inst = ExactInstance::new(buyers, seller).map_err(err)?;
        let by_enumeration = enumerate_weak_opt_exact(&inst).map_err(err)?;
        let closed = weak_opt_expected_exact(&inst);
        if by_enumeration != closed {
            return Err(format!(
                "case {case}: enumeration {by_enumeration} vs closed form {closed}"
            ));
        }
    }
    Ok("50 random rational instances agree exactly".into())
}

fn c7_upper_constant() -> Check {
    let r = alg3_ratio(th(UPPER_TH));
    let ok = (r.via_p1 - 1.83683).abs() <= 1e-4 && (r.via_sale - 1.83683).abs() <= 1e-4;
    ensure(
        ok,
        format!(
            "via p1 limit {:.6}, via sale probability {:.6}",
            r.via_p1, r.via_sale
        ),
    )
}

fn c8_lower_family_optimum() -> Check {
    let r = optimize_thresholds(Objective::LowerFamily, 1e-3).map_err(err)?;
    let ok = (r.value - 1.76239).abs() <= 1e-4
        && (r.th.t1 - LOWER_TH.0).abs() <= 1e-3
        && (r.th.t2 - LOWER_TH.1).abs() <= 1e-3;
    ensure(
        ok,
        format!("value {:.6} at ({:.6}, {:.6})", r.value, r.th.t1, r.th.t2),
    )
}

fn c9_finite_n() -> Check {
    let th = th(UPPER_TH);
    let sale = alg3_sale_prob(th);
    let mut worst_sum = 0.0f64;
    for n in [2, 5, 10] {
        let sum: f64 = (1..=n)
            .map(|i| alg3_pi_finite(i, n, th))
            .sum::<Result<f64, _>>()
            .map_err(err)?;
        worst_sum = worst_sum.max((sum - sale).abs());
    }
    let buyers: Vec<f64> = (0..10).map(|k| 10.0 - k as f64).collect();
    let inst = Instance::new(buyers, 0.0).map_err(err)?;
    let r = simulate(
        &PolicySpec::Alg3 { thresholds: th },
        &inst,
        MC_TRIALS,
        MC_SEED,
        workers(),
    )
    .map_err(err)?;
    let mut worst_z = 0.0f64;
    for i in 1..=10 {
        let want = alg3_pi_finite(i, 10, th).map_err(err)?;
        let sigma = (want * (1.0 - want) / MC_TRIALS as f64).sqrt();
        worst_z = worst_z.max(((r.holder(i).0 - want) / sigma).abs());
    }
    ensure(
        worst_sum <= 1e-6 && worst_z <= 3.0,
        format!("max |sum p_i - sale| = {worst_sum:.1e}; worst Monte-Carlo deviation {worst_z:.2} sigma"),
    )
}

fn c10_unimodality() -> Check {
    let th = th(UPPER_TH);
    let s = |i| beta_limit_sum(i, th).map_err(err);
    let (b1, b2, b3) = (s(1)?, s(2)?, s(3)?);
    let d21 = b2 - b1;
    let d23 = b2 - b3;
    let mut unimodal = Vec::new();
    for n in 2..=12 {
        if !unimodality_f(n, th).map_err(err)?.unimodal {
            unimodal.push(n);
        }
    }
    ensure(
        (d21 - 0.459218).abs() <= 1e-4 && (d23 - 0.1186).abs() <= 5e-4 && unimodal.is_empty(),
        format!(
            "sum_k b_k1(2) - b_k1(1) = {d21:.6} (want 0.459218); sum_k b_k1(2) - b_k1(3) = {d23:.6} (want 0.1186); \
             non-unimodal n: {unimodal:?}"
        ),
    )
}

fn c11_mono_thresholds() -> Check {
    let a = mono_thresholds(UPPER_TH.0).map_err(err)?;
    let b = mono_thresholds(UPPER_TH.1).map_err(err)?;
    ensure(
        (a.i1, b.i2, b.i1) == (9, 3, 1),
        format!(
            "I1({}) = {}, I2({}) = {}, I1({}) = {}",
            UPPER_TH.0, a.i1, UPPER_TH.1, b.i2, UPPER_TH.1, b.i1
        ),
    )
}

fn c12_strong_certificate() -> Check {
    let target = 0.283834;
    let mut gaps = Vec::new();
    let mut worst_residual = f64::INFINITY;
    let mut objectives = Vec::new();
    for n in [100, 10_000, 1_000_000] {
        let cert = strong_dual_certificate(n).map_err(err)?;
        let check = verify_dual_feasibility(CertificateRef::Strong(&cert), 1e-12);
        if !check.feasible() {
            return Err(format!("n = {n}: {} violations", check.violations));
        }
        worst_residual = worst_residual.min(cert.min_residual).min(check.min_slack);
        gaps.push((cert.objective - target).abs());
        objectives.push(cert.objective);
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    ensure(
        worst_residual >= -1e-12 && monotone && gaps[2] < 1.1e-3,
        format!(
            "objectives {objectives:.7?}, min residual {worst_residual:.1e}, final gap {:.2e}",
            gaps[2]
        ),
    )
}

fn c13_weak_certificate() -> Check {
    let cert = weak_dual_certificate(2_000_000, 0.970659, 0.029341).map_err(err)?;
    let check = verify_dual_feasibility(CertificateRef::Weak(&cert), 1e-12);
    let residual = cert
        .min_residual_u
        .min(cert.min_residual_v)
        .min(check.min_slack);
    ensure(
        (cert.objective - 0.567411).abs() <= 5e-4 && residual >= -1e-12 && check.feasible(),
        format!(
            "objective {:.7}, min residual {residual:.1e}",
            cert.objective
        ),
    )
}

fn c14_sandwich() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for (kind, max_n) in [(PrimalKind::Strong, 40), (PrimalKind::Weak, 30)] {
        for n in 2..=max_n {
            let primal = solve_primal(kind, n).map_err(err)?;
            let dual = match kind {
                PrimalKind::Strong => strong_dual_certificate(n).map_err(err)?.objective,
                PrimalKind::Weak => {
                    weak_dual_certificate(n, 0.970659, 0.029341)
                        .map_err(err)?
                        .objective
                }
            };
            if !primal.feasible || primal.objective_value > dual + 1e-9 {
                return Err(format!(
                    "{kind:?} n = {n}: primal {} vs dual {dual}",
                    primal.objective_value
                ));
            }
            worst = worst.max(primal.objective_value - dual);
        }
    }
    Ok(format!(
        "primal <= dual for strong n <= 40 and weak n <= 30 (max primal - dual {worst:.2e})"
    ))
}

fn c15_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let runs = [
        ("alg1", "geometric:n=8,r=0.7", None),
        ("alg2", "flat_k:n=10,k=3", None),
        ("alg3", "spike:n=12", Some(UPPER_TH)),
        ("secretary-baseline", "geometric:n=6,r=0.5", None),
    ];
    for (policy, instance, thresholds) in runs {
        let mut outputs = Vec::new();
        for (rep, w) in [(0, 1), (1, 1), (2, 8), (3, 8)] {
            let out = dir.path().join(format!("{policy}-{rep}.json"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_spvt"));
            cmd.args([
                "simulate",
                "--policy",
                policy,
                "--instance",
                instance,
                "--trials",
                "100000",
            ])
            .args(["--seed", "99", "--workers", &w.to_string(), "--out"])
            .arg(&out);
            if let Some((t1, t2)) = thresholds {
                cmd.args(["--t1", &t1.to_string(), "--t2", &t2.to_string()]);
            }
            let result = cmd.output().map_err(err)?;
            if !result.status.success() {
                return Err(format!("{policy}: exit {:?}", result.status.code()));
            }
            outputs.push((std::fs::read(&out).map_err(err)?, result.stdout));
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!(
                "{policy}: outputs differ across repeats or worker counts"
            ));
        }
    }
    Ok("4 policies x workers {1,8} x 2 repeats: --out files and stdout byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 15] = [
        (
            "strong-ratio constant",
            Duration::from_secs(1),
            c1_strong_constant,
        ),
        (
            "delta monotonicity",
            Duration::from_secs(30),
            c2_delta_monotone,
        ),
        (
            "alg1 seller holding",
            Duration::from_secs(60),
            c3_alg1_seller,
        ),
        (
            "alg1 best-buyer probability",
            Duration::from_secs(60),
            c4_alg1_best_buyer,
        ),
        ("alg2 exactness", Duration::from_secs(10), c5_alg2_exact),
        (
            "weak optimum closed form",
            Duration::from_secs(30),
            c6_weak_opt_closed_form,
        ),
        (
            "two-threshold upper constant",
            Duration::from_secs(1),
            c7_upper_constant,
        ),
        (
            "lower-family optimum",
            Duration::from_secs(60),
            c8_lower_family_optimum,
        ),
        ("finite-n formulas", Duration::from_secs(300), c9_finite_n),
        (
            "unimodality numerics",
            Duration::from_secs(120),
            c10_unimodality,
        ),
        (
            "monotonicity thresholds",
            Duration::from_secs(1),
            c11_mono_thresholds,
        ),
        (
            "strong dual certificate",
            Duration::from_secs(10),
            c12_strong_certificate,
        ),
        (
            "weak dual certificate",
            Duration::from_secs(30),
            c13_weak_certificate,
        ),
        (
            "weak duality sandwich",
            Duration::from_secs(300),
            c14_sandwich,
        ),
        ("determinism", Duration::from_secs(120), c15_determinism),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded time limit {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
