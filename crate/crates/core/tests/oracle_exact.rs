use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use spvt_core::model::{gen_instance, ExactInstance, Family};
use spvt_core::oracle::{alg2_exact_weak_ratio, enumerate_alg2_exact, enumerate_weak_opt_exact};
use spvt_core::weak_opt_expected_exact;

fn small_family_instances() -> Vec<ExactInstance> {
    let mut out = Vec::new();
    for n in 1..=5 {
        let mut fams = vec![Family::Spike { n }, Family::SellerSpike { n }];
        fams.extend((0..=n).map(|k| Family::FlatK { n, k }));
        fams.extend([0.5, 0.9].map(|ratio| Family::Geometric { n, ratio }));
        for f in fams {
            out.push(ExactInstance::from_instance(&gen_instance(f).unwrap()).unwrap());
        }
    }
    out
}

fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn alg2_holder_probabilities_on_families() {
    for inst in small_family_instances() {
        let d = enumerate_alg2_exact(&inst).unwrap();
        for i in 1..=d.mu {
            assert_eq!(
                d.holder_prob[i],
                frac(1, 2 * (i * (i + 1)) as i64),
                "i={i}, {inst:?}"
            );
        }
        for i in d.mu + 1..=d.n {
            assert!(d.holder_prob[i].is_zero());
        }
        assert_eq!(d.holder_prob[d.n + 1], frac(1, 2 * (d.mu + 1) as i64));
        let total = d.holder_prob.iter().fold(BigRational::zero(), |s, p| s + p);
        assert!(total.is_one());
    }
}

#[test]
fn alg2_weak_ratio_is_exactly_two() {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut checked = 0;
    for inst in small_family_instances() {
        if let Some(r) = alg2_exact_weak_ratio(&inst).unwrap() {
            assert_eq!(r, two, "{inst:?}");
            checked += 1;
        }
    }
    assert!(checked > 20);
}

#[test]
fn denominators_divide_twice_the_order_count() {
    for inst in small_family_instances() {
        let d = enumerate_alg2_exact(&inst).unwrap();
        let orders: BigInt = (1..=d.n + 1).map(BigInt::from).product::<BigInt>() * 2;
        for p in &d.holder_prob {
            assert!((&orders % p.denom()).is_zero());
        }
    }
}

fn rational() -> impl Strategy<Value = BigRational> {
    (0i64..40, 1i64..12).prop_map(|(a, b)| frac(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn enumeration_matches_closed_form(buyers in prop::collection::vec(rational(), 1..=6), seller in rational()) {
        let inst = ExactInstance::new(buyers, seller).unwrap();
        prop_assert_eq!(enumerate_weak_opt_exact(&inst).unwrap(), weak_opt_expected_exact(&inst));
    }

    #[test]
    fn item_ends_below_seller_half_the_time(buyers in prop::collection::vec(rational(), 1..=5), seller in rational()) {
        let inst = ExactInstance::new(buyers, seller).unwrap();
        let d = enumerate_alg2_exact(&inst).unwrap();
        let (prices, mu) = inst.ranked_prices();
        prop_assume!(mu >= 1);
        let below = (0..=d.n + 1)
            .filter(|&a| a != d.n + 1 && prices[a] < inst.seller_price || a == 0)
            .fold(BigRational::zero(), |s, a| s + &d.holder_prob[a]);
        prop_assert_eq!(below, frac(1, 2));
    }
}
