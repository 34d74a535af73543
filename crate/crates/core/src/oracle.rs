//! Exhaustive enumeration over arrival orders in exact arithmetic.
//!
//! Only order-determined quantities are enumerated here: the weak
//! benchmark and the coin-flipping policy, which never looks at arrival
//! times. Time-dependent policies are checked against quadrature instead.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Result, SpvtError};
use crate::model::{canonicalize, ArrivalSample, ExactInstance, Instance, INTERMEDIARY};
use crate::policies::{run_episode, PolicySpec};
use crate::rng::FixedCoin;

pub const WEAK_OPT_CAP: usize = 7;
pub const ALG2_CAP: usize = 6;

/// Advances `v` to the next permutation in lexicographic order.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("a larger element exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn for_each_order(agents: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut order: Vec<usize> = (1..=agents).collect();
    loop {
        f(&order)?;
        if !next_permutation(&mut order) {
            return Ok(());
        }
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).map(BigInt::from).product()
}

fn cap(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(SpvtError::SizeLimit {
            what,
            got: n,
            cap: limit,
        });
    }
    Ok(())
}

/// Average of the per-order weak benchmark over all `(n+1)!` orders.
pub fn enumerate_weak_opt_exact(instance: &ExactInstance) -> Result<BigRational> {
    let n = instance.n();
    cap("weak benchmark enumeration n", n, WEAK_OPT_CAP)?;
    let (prices, _) = instance.ranked_prices();
    let seller = n + 1;
    let mut total = BigRational::zero();
    for_each_order(n + 1, |order| {
        let pos = order
            .iter()
            .position(|&a| a == seller)
            .expect("seller present");
        let best = order[pos + 1..]
            .iter()
            .map(|&a| &prices[a])
            .fold(&prices[seller], |m, p| if p > m { p } else { m });
        total += best;
        Ok(())
    })?;
    Ok(total / BigRational::from_integer(factorial(n + 1)))
}

/// Exact result of enumerating the coin-flipping policy.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub n: usize,
    pub mu: usize,
    /// `holder_prob[a]` for agent id `a` in `0..=n+1` (canonical ranks).
    pub holder_prob: Vec<BigRational>,
    pub expected_welfare: BigRational,
    pub orders: usize,
    /// Orders on which the coin was consulted.
    pub coin_orders: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fraction {
    pub exact: String,
    pub approx: f64,
}

impl From<&BigRational> for Fraction {
    fn from(q: &BigRational) -> Self {
        Fraction {
            exact: q.to_string(),
            approx: q.to_f64().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistributionOut {
    pub n: usize,
    pub mu: usize,
    pub holder_prob: Vec<Fraction>,
    pub expected_welfare: Fraction,
    pub orders: usize,
    pub coin_orders: usize,
}

impl OutcomeDistribution {
    pub fn to_output(&self) -> OutcomeDistributionOut {
        OutcomeDistributionOut {
            n: self.n,
            mu: self.mu,
            holder_prob: self.holder_prob.iter().map(Fraction::from).collect(),
            expected_welfare: Fraction::from(&self.expected_welfare),
            orders: self.orders,
            coin_orders: self.coin_orders,
        }
    }
}

/// Replays the coin-flipping policy on every arrival order, averaging the
/// two coin outcomes whenever the coin is consulted.
pub fn enumerate_alg2_exact(instance: &ExactInstance) -> Result<OutcomeDistribution> {
    let n = instance.n();
    cap("alg2 enumeration n", n, ALG2_CAP)?;
    let (prices, mu) = instance.ranked_prices();
    // The policy only compares prices, so a strictly decreasing encoding of
    // the exact canonical order drives it without any rounding.
    let level = |rank_pos: usize| (n + 2 - rank_pos) as f64;
    let buyers = (1..=n)
        .map(|r| level(if r <= mu { r } else { r + 1 }))
        .collect();
    let encoded = canonicalize(&Instance::new(buyers, level(mu + 1))?)?;
    debug_assert_eq!(encoded.mu(), mu);
    let times: Vec<f64> = (1..=n + 1).map(|k| k as f64 / (n + 2) as f64).collect();

    // Counts in units of 1 / (2 (n+1)!).
    let mut halves = vec![0u64; n + 2];
    let mut orders = 0;
    let mut coin_orders = 0;
    for_each_order(n + 1, |order| {
        orders += 1;
        let sample = ArrivalSample::new(order.to_vec(), times.clone())?;
        let mut heads = FixedCoin::new(true);
        let h = run_episode(&PolicySpec::Alg2, &encoded, &sample, &mut heads)?;
        if heads.flips == 0 {
            halves[h.holder] += 2;
            return Ok(());
        }
        coin_orders += 1;
        let t = run_episode(
            &PolicySpec::Alg2,
            &encoded,
            &sample,
            &mut FixedCoin::new(false),
        )?;
        halves[h.holder] += 1;
        halves[t.holder] += 1;
        Ok(())
    })?;

    let denom: BigInt = factorial(n + 1) * 2;
    let holder_prob: Vec<BigRational> = halves
        .iter()
        .map(|&c| BigRational::new(BigInt::from(c), denom.clone()))
        .collect();
    let expected_welfare = holder_prob
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != INTERMEDIARY)
        .map(|(a, p)| p * &prices[a])
        .fold(BigRational::zero(), |s, x| s + x);
    Ok(OutcomeDistribution {
        n,
        mu,
        holder_prob,
        expected_welfare,
        orders,
        coin_orders,
    })
}

/// Weak benchmark over policy welfare, or `None` when the policy earns 0.
pub fn alg2_exact_weak_ratio(instance: &ExactInstance) -> Result<Option<BigRational>> {
    let opt = enumerate_weak_opt_exact(instance)?;
    let alg = enumerate_alg2_exact(instance)?.expected_welfare;
    Ok(if alg.is_zero() { None } else { Some(opt / alg) })
}
