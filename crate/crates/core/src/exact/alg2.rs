//! Exact holder probabilities of the coin-flipping policy.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::error::{invalid_arg, Result};

/// `p = p_before + p_after`, where `p_before` counts sales to buyer `i`
/// when the top `mu` buyer among those before the seller is the best
/// earlier agent, and `p_after` counts the case where the seller itself
/// beats every earlier agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alg2HolderProb {
    pub i: usize,
    pub mu: usize,
    #[serde(serialize_with = "as_fraction")]
    pub p: BigRational,
    #[serde(serialize_with = "as_fraction")]
    pub p_before: BigRational,
    #[serde(serialize_with = "as_fraction")]
    pub p_after: BigRational,
}

fn as_fraction<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn frac(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn alg2_holder_prob(i: usize, mu: usize) -> Result<Alg2HolderProb> {
    if i < 1 || i > mu {
        return Err(invalid_arg(format!("buyer rank {i} must lie in 1..={mu}")));
    }
    let (iu, mu_u) = (i as u64, mu as u64);
    let p = frac(1, 2 * iu * (iu + 1));
    let p_after = frac(1, 2 * mu_u * (mu_u + 1));
    let p_before = (frac(1, iu * (iu + 1)) - frac(1, mu_u * (mu_u + 1))) / frac(2, 1);
    debug_assert_eq!(&p_before + &p_after, p);
    Ok(Alg2HolderProb {
        i,
        mu,
        p,
        p_before,
        p_after,
    })
}
