//! Seeded parallel simulation of policies over random arrival orders.
//!
//! Trials are cut into fixed blocks of [`BLOCK_TRIALS`]. Each block is
//! summed on one worker and the block sums are folded in block order, so
//! the report is bit-identical for any worker count.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid_arg, Result, SpvtError};
use crate::model::{canonicalize, gen_instance, sample_arrival, Family, Instance, RankedInstance};
use crate::offline::{strong_opt, weak_opt_given_order};
use crate::policies::{run_episode, PolicySpec};
use crate::rng::{trial_rng, RngCoin};
use crate::sum::CompensatedSum;

pub const BLOCK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub policy: String,
    pub instance_digest: String,
    pub n: usize,
    pub mu: usize,
    pub trials: u64,
    pub seed: u64,
    /// Agent id to empirical holding frequency. Ids are canonical ranks:
    /// 0 the intermediary, 1..=n buyers from best to worst, n+1 the seller.
    pub holder_freq: BTreeMap<usize, f64>,
    pub holder_counts: Vec<u64>,
    pub mean_alg_welfare: f64,
    pub se_alg_welfare: f64,
    pub mean_weak_opt: f64,
    pub se_weak_opt: f64,
    pub strong_opt: f64,
    pub ratio_strong: f64,
    pub ratio_weak: f64,
}

impl SimulationReport {
    /// Frequency and its binomial standard error for one agent id.
    pub fn holder(&self, agent: usize) -> (f64, f64) {
        let count = self.holder_counts.get(agent).copied().unwrap_or(0);
        let p = count as f64 / self.trials as f64;
        (p, (p * (1.0 - p) / self.trials as f64).sqrt())
    }
}

/// Stable hex digest of an instance's exact price bits.
pub fn instance_digest(instance: &Instance) -> String {
    // 64-bit FNV-1a.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(&(instance.n() as u64).to_le_bytes());
    for p in instance
        .buyer_prices
        .iter()
        .chain(std::iter::once(&instance.seller_price))
    {
        feed(&p.to_bits().to_le_bytes());
    }
    format!("{h:016x}")
}

#[derive(Clone)]
struct BlockTotals {
    counts: Vec<u64>,
    alg: CompensatedSum,
    alg_sq: CompensatedSum,
    weak: CompensatedSum,
    weak_sq: CompensatedSum,
}

impl BlockTotals {
    fn new(agents: usize) -> Self {
        BlockTotals {
            counts: vec![0; agents],
            alg: CompensatedSum::new(),
            alg_sq: CompensatedSum::new(),
            weak: CompensatedSum::new(),
            weak_sq: CompensatedSum::new(),
        }
    }

    fn merge(&mut self, other: &BlockTotals) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.alg.merge(&other.alg);
        self.alg_sq.merge(&other.alg_sq);
        self.weak.merge(&other.weak);
        self.weak_sq.merge(&other.weak_sq);
    }
}

fn run_block(
    policy: &PolicySpec,
    ranked: &RankedInstance,
    seed: u64,
    trials: std::ops::Range<u64>,
) -> Result<BlockTotals> {
    let n = ranked.n();
    let mut tot = BlockTotals::new(n + 2);
    for t in trials {
        let mut rng = trial_rng(seed, t);
        let sample = sample_arrival(n, &mut rng)?;
        let outcome = run_episode(policy, ranked, &sample, &mut RngCoin(&mut rng))?;
        let weak = weak_opt_given_order(ranked, &sample.order)?;
        tot.counts[outcome.holder] += 1;
        tot.alg.add(outcome.welfare);
        tot.alg_sq.add(outcome.welfare * outcome.welfare);
        tot.weak.add(weak);
        tot.weak_sq.add(weak * weak);
    }
    Ok(tot)
}

fn mean_and_se(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - sum * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

pub fn simulate(
    policy: &PolicySpec,
    instance: &Instance,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<SimulationReport> {
    if trials < 1 {
        return Err(invalid_arg("trials must be at least 1"));
    }
    if workers < 1 {
        return Err(invalid_arg("workers must be at least 1"));
    }
    if matches!(policy, PolicySpec::Alg3 { .. }) && instance.seller_price != 0.0 {
        return Err(SpvtError::Domain(format!(
            "alg3 is defined only for a zero seller price, got {}",
            instance.seller_price
        )));
    }
    let ranked = canonicalize(instance)?;
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SpvtError::Numeric(format!("cannot start worker pool: {e}")))?;
    let partials: Vec<BlockTotals> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK_TRIALS;
                run_block(
                    policy,
                    &ranked,
                    seed,
                    start..(start + BLOCK_TRIALS).min(trials),
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut total = BlockTotals::new(ranked.n() + 2);
    for p in &partials {
        total.merge(p);
    }

    let (mean_alg, se_alg) = mean_and_se(total.alg.value(), total.alg_sq.value(), trials);
    let (mean_weak, se_weak) = mean_and_se(total.weak.value(), total.weak_sq.value(), trials);
    let strong = strong_opt(&ranked);
    let holder_freq = total
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(a, &c)| (a, c as f64 / trials as f64))
        .collect();
    Ok(SimulationReport {
        policy: policy.to_string(),
        instance_digest: instance_digest(instance),
        n: ranked.n(),
        mu: ranked.mu(),
        trials,
        seed,
        holder_freq,
        holder_counts: total.counts,
        mean_alg_welfare: mean_alg,
        se_alg_welfare: se_alg,
        mean_weak_opt: mean_weak,
        se_weak_opt: se_weak,
        strong_opt: strong,
        ratio_strong: strong / mean_alg,
        ratio_weak: mean_weak / mean_alg,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub policy: String,
    pub family: String,
    pub param: f64,
    pub trials: u64,
    pub mean_alg: f64,
    pub se_alg: f64,
    pub mean_opt_weak: f64,
    pub opt_strong: f64,
    pub ratio_weak: f64,
    pub ratio_strong: f64,
}

/// Simulates `policy` on `family` with its sweep parameter set to each
/// of `params` in turn (see [`Family::with_param`]).
pub fn estimate_ratio_curve(
    policy: &PolicySpec,
    family: Family,
    params: &[f64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<CurveRow>> {
    params
        .iter()
        .map(|&param| {
            let fam = family.with_param(param)?;
            let r = simulate(policy, &gen_instance(fam)?, trials, seed, workers)?;
            Ok(CurveRow {
                policy: r.policy,
                family: fam.name().to_string(),
                param,
                trials,
                mean_alg: r.mean_alg_welfare,
                se_alg: r.se_alg_welfare,
                mean_opt_weak: r.mean_weak_opt,
                opt_strong: r.strong_opt,
                ratio_weak: r.ratio_weak,
                ratio_strong: r.ratio_strong,
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let io = |e: csv::Error| SpvtError::Numeric(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| SpvtError::Numeric(format!("csv output failed: {e}")))
}
