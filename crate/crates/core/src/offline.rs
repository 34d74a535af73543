//! Strong and weak offline benchmarks.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num};

use crate::error::{invalid_arg, Result};
use crate::model::{validate_permutation, ExactInstance, RankedInstance};

/// Strong benchmark: the best price over all agents.
pub fn strong_opt(instance: &RankedInstance) -> f64 {
    instance.sorted_buyer_prices()[0].max(instance.seller_price())
}

/// Best achievable welfare for a known arrival order: the seller's price or
/// the best buyer arriving after the seller, whichever is higher.
pub fn weak_opt_given_order(instance: &RankedInstance, order: &[usize]) -> Result<f64> {
    if order.len() != instance.n() + 1 {
        return Err(invalid_arg(format!(
            "order has {} agents, instance has {}",
            order.len(),
            instance.n() + 1
        )));
    }
    validate_permutation(order)?;
    let seller = instance.seller_id();
    let seller_pos = order
        .iter()
        .position(|&a| a == seller)
        .expect("permutation holds the seller");
    let best_after = order[seller_pos + 1..]
        .iter()
        .map(|&a| instance.price_of(a))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best_after.max(instance.seller_price()))
}

/// Expected weak benchmark over a uniform arrival order, for any numeric
/// type: `sum_{i<=mu} X_i / (i(i+1)) + X_seller / (mu + 1)`.
///
/// `sorted_buyers` must be in canonical descending order and `mu` the
/// number of buyers ranked above the seller.
pub fn weak_opt_expected_in<T>(sorted_buyers: &[T], seller: &T, mu: usize) -> T
where
    T: Clone + Num + FromPrimitive,
{
    let from = |k: usize| T::from_usize(k).expect("small integers convert");
    let mut total = seller.clone() / from(mu + 1);
    for (i, x) in sorted_buyers.iter().take(mu).enumerate() {
        let i = i + 1;
        total = total + x.clone() / from(i * (i + 1));
    }
    total
}

/// Closed-form expected weak benchmark.
pub fn weak_opt_expected(instance: &RankedInstance) -> f64 {
    weak_opt_expected_in(
        instance.sorted_buyer_prices(),
        &instance.seller_price(),
        instance.mu(),
    )
}

/// Closed-form expected weak benchmark in exact arithmetic.
pub fn weak_opt_expected_exact(instance: &ExactInstance) -> BigRational {
    let (prices, mu) = instance.ranked_prices();
    let n = instance.n();
    weak_opt_expected_in(&prices[1..=n], &prices[n + 1], mu)
}

/// Probability that the weak benchmark ends with agent `agent`:
/// `1/(i(i+1))` for buyer ranks `i <= mu`, `1/(mu+1)` for the seller.
pub fn weak_opt_holder_prob(instance: &RankedInstance, agent: usize) -> f64 {
    let mu = instance.mu();
    if agent == instance.seller_id() {
        1.0 / (mu + 1) as f64
    } else if (1..=mu).contains(&agent) {
        1.0 / (agent * (agent + 1)) as f64
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonicalize, gen_instance, Family, Instance};
    use proptest::prelude::*;

    fn ranked(b: Vec<f64>, s: f64) -> RankedInstance {
        canonicalize(&Instance::new(b, s).unwrap()).unwrap()
    }

    #[test]
    fn strong_examples() {
        assert_eq!(strong_opt(&ranked(vec![1.0, 0.5], 0.25)), 1.0);
        for f in [Family::SellerSpike { n: 3 }, Family::Spike { n: 5 }] {
            assert_eq!(
                strong_opt(&canonicalize(&gen_instance(f).unwrap()).unwrap()),
                1.0
            );
        }
    }

    #[test]
    fn weak_given_order_examples() {
        // Ranks: buyer 5 -> 1, buyer 3 -> 2, seller -> 3.
        let inst = ranked(vec![5.0, 3.0], 0.0);
        assert_eq!(weak_opt_given_order(&inst, &[3, 2, 1]).unwrap(), 5.0);
        assert_eq!(weak_opt_given_order(&inst, &[1, 2, 3]).unwrap(), 0.0);
        let inst = ranked(vec![1.0, 0.5], 0.25);
        assert_eq!(weak_opt_given_order(&inst, &[1, 3, 2]).unwrap(), 0.5);
        assert!(weak_opt_given_order(&inst, &[1, 1, 2]).is_err());
        assert!(weak_opt_given_order(&inst, &[1, 2]).is_err());
    }

    #[test]
    fn weak_expected_examples() {
        for n in 1..8 {
            let inst = canonicalize(&gen_instance(Family::Spike { n }).unwrap()).unwrap();
            assert!((weak_opt_expected(&inst) - 0.5).abs() < 1e-15);
            for k in 1..=n {
                let inst = canonicalize(&gen_instance(Family::FlatK { n, k }).unwrap()).unwrap();
                assert!((weak_opt_expected(&inst) - k as f64 / (k + 1) as f64).abs() < 1e-15);
            }
        }
        assert!((weak_opt_expected(&ranked(vec![1.0, 0.5], 0.25)) - 2.0 / 3.0).abs() < 1e-15);
        // mu = 0: the seller keeps the item.
        assert_eq!(weak_opt_expected(&ranked(vec![0.1, 0.2], 0.7)), 0.7);
    }

    fn all_orders(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_orders(m - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, m);
                out.push(q);
            }
        }
        out
    }

    proptest! {
        #[test]
        fn closed_form_is_the_order_average(
            buyers in prop::collection::vec(0u8..6, 1..5),
            seller in 0u8..6,
        ) {
            let inst = ranked(buyers.iter().map(|&b| b as f64).collect(), seller as f64);
            let orders = all_orders(inst.n() + 1);
            let mean = orders.iter().map(|o| weak_opt_given_order(&inst, o).unwrap()).sum::<f64>()
                / orders.len() as f64;
            prop_assert!((mean - weak_opt_expected(&inst)).abs() < 1e-12);
            prop_assert!(weak_opt_expected(&inst) <= strong_opt(&inst) + 1e-12);
        }

        #[test]
        fn weak_given_order_is_monotone_in_prices(
            buyers in prop::collection::vec(0.0f64..1.0, 1..6),
            seller in 0.0f64..1.0,
            which in 0usize..7,
            bump in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let inst = Instance::new(buyers.clone(), seller).unwrap();
            let n = inst.n();
            // A raw-index order, mapped to ranks separately for each instance.
            let mut raw: Vec<usize> = (0..=n).collect();
            raw.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let eval = |inst: &Instance| {
                let r = canonicalize(inst).unwrap();
                let mut rank_of_raw = vec![0; n + 1];
                for (rank, &orig) in r.original_index_of_rank().iter().enumerate() {
                    rank_of_raw[orig] = rank + 1;
                }
                rank_of_raw[n] = n + 1;
                let order: Vec<usize> = raw.iter().map(|&a| rank_of_raw[a]).collect();
                weak_opt_given_order(&r, &order).unwrap()
            };
            let mut raised = inst.clone();
            let w = which % (n + 1);
            if w == n { raised.seller_price += bump } else { raised.buyer_prices[w] += bump }
            prop_assert!(eval(&raised) >= eval(&inst));
        }
    }
}
