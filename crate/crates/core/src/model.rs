//! Instances, canonical ranking, arrival samples and the instance families.
//!
//! Agent ids used throughout the crate refer to the *canonical ranking*:
//! `0` is the intermediary, `1..=n` are buyers in descending price order
//! (`1` is the best buyer) and `n + 1` is the seller.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpvtError};

/// Id of the intermediary in [`TradeOutcome::holder`].
pub const INTERMEDIARY: usize = 0;

/// A price as written in an instance file: a JSON number or a fraction
/// string such as `"1/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriceLiteral {
    Number(serde_json::Number),
    Text(String),
}

impl PriceLiteral {
    /// Exact rational value. JSON numbers are read from their decimal text,
    /// so `0.1` becomes `1/10`, not the nearest binary double.
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            PriceLiteral::Number(n) => parse_decimal(&n.to_string()),
            PriceLiteral::Text(s) => parse_rational(s),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            PriceLiteral::Number(n) => n
                .as_f64()
                .ok_or_else(|| SpvtError::Parse(format!("not a finite number: {n}"))),
            PriceLiteral::Text(_) => rational_to_f64(&self.to_rational()?),
        }
    }
}

impl From<f64> for PriceLiteral {
    fn from(x: f64) -> Self {
        serde_json::Number::from_f64(x)
            .map(PriceLiteral::Number)
            .unwrap_or_else(|| PriceLiteral::Text(x.to_string()))
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> Result<f64> {
    r.to_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| SpvtError::Parse(format!("{r} is not representable as f64")))
}

/// Parses `"a/b"`, `"a"` or a decimal such as `"0.25"` / `"1e-3"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| SpvtError::Parse(format!("bad numerator in {s:?}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| SpvtError::Parse(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return Err(SpvtError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || SpvtError::Parse(format!("not a decimal number: {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let value: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let r = if scale >= 0 {
        BigRational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(value, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

/// Raw instance: buyer prices in input order plus the seller's price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub buyer_prices: Vec<f64>,
    pub seller_price: f64,
}

/// On-disk form of an instance (`{"buyer_prices": [...], "seller_price": ...}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub buyer_prices: Vec<PriceLiteral>,
    pub seller_price: PriceLiteral,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SpvtError::Parse(e.to_string()))
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let buyer_prices = self
            .buyer_prices
            .iter()
            .map(PriceLiteral::to_f64)
            .collect::<Result<Vec<_>>>()?;
        Instance::new(buyer_prices, self.seller_price.to_f64()?)
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            buyer_prices: inst.buyer_prices.iter().map(|&p| p.into()).collect(),
            seller_price: inst.seller_price.into(),
        }
    }
}

impl Instance {
    pub fn new(buyer_prices: Vec<f64>, seller_price: f64) -> Result<Self> {
        let inst = Instance {
            buyer_prices,
            seller_price,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.buyer_prices.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.buyer_prices.is_empty() {
            return Err(SpvtError::InvalidInstance("no buyers".into()));
        }
        let ok = |p: f64| p.is_finite() && p >= 0.0;
        if let Some((i, p)) = self.buyer_prices.iter().enumerate().find(|(_, &p)| !ok(p)) {
            return Err(SpvtError::InvalidInstance(format!(
                "buyer {} has price {p}; prices must be finite and >= 0",
                i + 1
            )));
        }
        if !ok(self.seller_price) {
            return Err(SpvtError::InvalidInstance(format!(
                "seller price {} must be finite and >= 0",
                self.seller_price
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        InstanceFile::from_json(text)?.to_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serializes")
    }
}

/// Price plus the universal tie-break. Higher price wins; among equal prices
/// the agent with the lower original index wins. The seller carries index
/// `n + 1`, so a buyer tied with the seller ranks above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bid {
    pub price: f64,
    pub tiebreak: u32,
}

impl Eq for Bid {}

impl Ord for Bid {
    fn cmp(&self, other: &Self) -> Ordering {
        self.price
            .total_cmp(&other.price)
            .then_with(|| other.tiebreak.cmp(&self.tiebreak))
    }
}

impl PartialOrd for Bid {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorts buyers by (price desc, index asc) and counts how many rank above
/// the seller. Works for any totally ordered price type (f64 or rationals).
/// Returns `(original_index_of_rank, mu)` with 0-based original indices.
pub fn rank_buyers<T: PartialOrd>(buyers: &[T], seller: &T) -> (Vec<usize>, usize) {
    let mut idx: Vec<usize> = (0..buyers.len()).collect();
    idx.sort_by(|&a, &b| {
        buyers[b]
            .partial_cmp(&buyers[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mu = buyers.iter().filter(|p| *p >= seller).count();
    (idx, mu)
}

/// An instance in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedInstance {
    sorted_buyer_prices: Vec<f64>,
    original_index_of_rank: Vec<usize>,
    seller_price: f64,
    mu: usize,
}

/// Canonical form of an instance. Pure and idempotent.
pub fn canonicalize(instance: &Instance) -> Result<RankedInstance> {
    instance.validate()?;
    let (order, mu) = rank_buyers(&instance.buyer_prices, &instance.seller_price);
    Ok(RankedInstance {
        sorted_buyer_prices: order.iter().map(|&i| instance.buyer_prices[i]).collect(),
        original_index_of_rank: order,
        seller_price: instance.seller_price,
        mu,
    })
}

impl RankedInstance {
    pub fn n(&self) -> usize {
        self.sorted_buyer_prices.len()
    }

    /// Number of buyers ranked above the seller.
    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn seller_id(&self) -> usize {
        self.n() + 1
    }

    pub fn seller_price(&self) -> f64 {
        self.seller_price
    }

    pub fn sorted_buyer_prices(&self) -> &[f64] {
        &self.sorted_buyer_prices
    }

    /// 0-based raw index of the buyer holding rank `rank` (1-based).
    pub fn original_index_of_rank(&self) -> &[usize] {
        &self.original_index_of_rank
    }

    /// Price of an agent id; the intermediary's "price" is 0.
    pub fn price_of(&self, agent: usize) -> f64 {
        match agent {
            INTERMEDIARY => 0.0,
            a if a <= self.n() => self.sorted_buyer_prices[a - 1],
            a if a == self.seller_id() => self.seller_price,
            a => panic!("agent id {a} out of range for n = {}", self.n()),
        }
    }

    pub fn bid_of(&self, agent: usize) -> Bid {
        let tiebreak = if agent == self.seller_id() {
            self.n() + 1
        } else {
            self.original_index_of_rank[agent - 1] + 1
        };
        Bid {
            price: self.price_of(agent),
            tiebreak: tiebreak as u32,
        }
    }

    /// Back to raw form with buyers in rank order; canonicalizing it again
    /// gives the same ranked prices and mu.
    pub fn to_instance(&self) -> Instance {
        Instance {
            buyer_prices: self.sorted_buyer_prices.clone(),
            seller_price: self.seller_price,
        }
    }
}

/// A uniformly random arrival order together with sorted arrival times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSample {
    /// `order[k]` is the agent id arriving at position `k + 1`.
    pub order: Vec<usize>,
    pub times: Vec<f64>,
}

impl ArrivalSample {
    pub fn new(order: Vec<usize>, times: Vec<f64>) -> Result<Self> {
        validate_permutation(&order)?;
        if times.len() != order.len() {
            return Err(invalid_arg(format!(
                "{} times for {} agents",
                times.len(),
                order.len()
            )));
        }
        if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(invalid_arg("arrival times must lie in [0, 1]"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid_arg("arrival times must be strictly increasing"));
        }
        Ok(ArrivalSample { order, times })
    }

    /// Number of buyers.
    pub fn n(&self) -> usize {
        self.order.len() - 1
    }

    /// 0-based arrival position of an agent.
    pub fn position_of(&self, agent: usize) -> usize {
        self.order
            .iter()
            .position(|&a| a == agent)
            .expect("agent in permutation")
    }
}

/// Checks that `order` is a permutation of `1..=order.len()`.
pub fn validate_permutation(order: &[usize]) -> Result<()> {
    if order.len() < 2 {
        return Err(invalid_arg(
            "an arrival order needs at least one buyer and the seller",
        ));
    }
    let mut seen = vec![false; order.len() + 1];
    for &a in order {
        if a == 0 || a > order.len() || std::mem::replace(&mut seen[a], true) {
            return Err(invalid_arg(format!(
                "{order:?} is not a permutation of 1..={}",
                order.len()
            )));
        }
    }
    Ok(())
}

/// Draws `n + 1` independent uniforms, sorts them, and pairs them with a
/// uniformly shuffled agent order.
pub fn sample_arrival<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ArrivalSample> {
    if n == 0 {
        return Err(invalid_arg("n must be at least 1"));
    }
    let mut order: Vec<usize> = (1..=n + 1).collect();
    order.shuffle(rng);
    let mut times: Vec<f64> = (0..=n).map(|_| rng.gen::<f64>()).collect();
    times.sort_by(f64::total_cmp);
    // Exact duplicates from a 53-bit uniform are astronomically rare; redraw.
    while times.windows(2).any(|w| w[0] >= w[1]) {
        times.iter_mut().for_each(|t| *t = rng.gen::<f64>());
        times.sort_by(f64::total_cmp);
    }
    Ok(ArrivalSample { order, times })
}

/// Two time thresholds with `0 <= t1 <= t2 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t1: f64,
    pub t2: f64,
}

impl Thresholds {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1.is_finite() && t2.is_finite() && 0.0 <= t1 && t1 <= t2 && t2 <= 1.0) {
            return Err(invalid_arg(format!(
                "thresholds need 0 <= t1 <= t2 <= 1, got t1 = {t1}, t2 = {t2}"
            )));
        }
        Ok(Thresholds { t1, t2 })
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.t1, self.t2)
    }
}

/// Result of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeOutcome {
    /// Agent id holding the item at the end; [`INTERMEDIARY`] if stuck.
    pub holder: usize,
    pub welfare: f64,
    /// Deal flag for each arrival position.
    pub decisions: Vec<bool>,
}

/// Instance families used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Best buyer 1, everyone else 0.
    Spike { n: usize },
    /// Top `k` buyers 1, the rest and the seller 0.
    FlatK { n: usize, k: usize },
    /// Seller 1, buyers 0.
    SellerSpike { n: usize },
    /// Buyer `i` priced `ratio^(i-1)`, seller 0.
    Geometric { n: usize, ratio: f64 },
}

impl Family {
    pub fn n(&self) -> usize {
        match *self {
            Family::Spike { n }
            | Family::FlatK { n, .. }
            | Family::SellerSpike { n }
            | Family::Geometric { n, .. } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Spike { .. } => "spike",
            Family::FlatK { .. } => "flat_k",
            Family::SellerSpike { .. } => "seller_spike",
            Family::Geometric { .. } => "geometric",
        }
    }

    /// Copy of this family with its sweep parameter replaced: `k` for
    /// `flat_k`, `ratio` for `geometric`, `n` otherwise.
    pub fn with_param(&self, value: f64) -> Result<Family> {
        let as_count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(invalid_arg(format!("{value} is not a valid count")))
            }
        };
        Ok(match *self {
            Family::Spike { .. } => Family::Spike { n: as_count()? },
            Family::FlatK { n, .. } => Family::FlatK { n, k: as_count()? },
            Family::SellerSpike { .. } => Family::SellerSpike { n: as_count()? },
            Family::Geometric { n, .. } => Family::Geometric { n, ratio: value },
        })
    }

    pub fn param(&self) -> f64 {
        match *self {
            Family::Spike { n } | Family::SellerSpike { n } => n as f64,
            Family::FlatK { k, .. } => k as f64,
            Family::Geometric { ratio, .. } => ratio,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Spike { n } => write!(f, "spike:n={n}"),
            Family::FlatK { n, k } => write!(f, "flat_k:n={n},k={k}"),
            Family::SellerSpike { n } => write!(f, "seller_spike:n={n}"),
            Family::Geometric { n, ratio } => write!(f, "geometric:n={n},r={ratio}"),
        }
    }
}

impl FromStr for Family {
    type Err = SpvtError;

    /// Parses `name:key=value,...`, e.g. `flat_k:n=10,k=3` or
    /// `geometric:n=5,r=0.5`. `flat_all:n=10` is shorthand for `k = n`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut n = None;
        let mut k = None;
        let mut ratio = None;
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| SpvtError::Parse(format!("expected key=value, got {kv:?}")))?;
            let bad = || SpvtError::Parse(format!("bad value for {key}: {value:?}"));
            match key.trim() {
                "n" => n = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "k" => k = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "r" | "ratio" => ratio = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
                other => {
                    return Err(SpvtError::Parse(format!(
                        "unknown family parameter {other:?}"
                    )))
                }
            }
        }
        let n = n.ok_or_else(|| SpvtError::Parse(format!("family {name:?} needs n=")))?;
        let fam = match name.trim() {
            "spike" => Family::Spike { n },
            "flat_k" => Family::FlatK {
                n,
                k: k.ok_or_else(|| SpvtError::Parse("flat_k needs k=".into()))?,
            },
            "flat_all" => Family::FlatK { n, k: n },
            "seller_spike" => Family::SellerSpike { n },
            "geometric" => Family::Geometric {
                n,
                ratio: ratio.unwrap_or(0.5),
            },
            other => return Err(SpvtError::Parse(format!("unknown family {other:?}"))),
        };
        Ok(fam)
    }
}

/// Builds the instance of a family.
pub fn gen_instance(family: Family) -> Result<Instance> {
    let n = family.n();
    if n == 0 {
        return Err(invalid_arg("n must be at least 1"));
    }
    let (buyers, seller) = match family {
        Family::Spike { n } => (
            (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
            0.0,
        ),
        Family::FlatK { n, k } => {
            if k > n {
                return Err(invalid_arg(format!(
                    "flat_k needs k <= n, got k = {k}, n = {n}"
                )));
            }
            ((0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect(), 0.0)
        }
        Family::SellerSpike { n } => (vec![0.0; n], 1.0),
        Family::Geometric { n, ratio } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(invalid_arg(format!(
                    "geometric ratio must be in (0, 1), got {ratio}"
                )));
            }
            ((0..n).map(|i| ratio.powi(i as i32)).collect(), 0.0)
        }
    };
    Instance::new(buyers, seller)
}

/// Exact-rational instance used by the enumeration oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInstance {
    pub buyer_prices: Vec<BigRational>,
    pub seller_price: BigRational,
}

impl ExactInstance {
    pub fn new(buyer_prices: Vec<BigRational>, seller_price: BigRational) -> Result<Self> {
        if buyer_prices.is_empty() {
            return Err(SpvtError::InvalidInstance("no buyers".into()));
        }
        if buyer_prices
            .iter()
            .chain(std::iter::once(&seller_price))
            .any(|p| *p < BigRational::zero())
        {
            return Err(SpvtError::InvalidInstance("prices must be >= 0".into()));
        }
        Ok(ExactInstance {
            buyer_prices,
            seller_price,
        })
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        let buyers = file
            .buyer_prices
            .iter()
            .map(PriceLiteral::to_rational)
            .collect::<Result<Vec<_>>>()?;
        ExactInstance::new(buyers, file.seller_price.to_rational()?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&InstanceFile::from_json(text)?)
    }

    /// Exact image of an f64 instance (every finite double is a rational).
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let conv = |x: f64| {
            BigRational::from_float(x)
                .ok_or_else(|| SpvtError::InvalidInstance(format!("{x} is not finite")))
        };
        ExactInstance::new(
            inst.buyer_prices
                .iter()
                .map(|&p| conv(p))
                .collect::<Result<_>>()?,
            conv(inst.seller_price)?,
        )
    }

    pub fn n(&self) -> usize {
        self.buyer_prices.len()
    }

    /// Prices in canonical rank order: index 0 is the intermediary (0),
    /// `1..=n` the ranked buyers, `n + 1` the seller.
    pub fn ranked_prices(&self) -> (Vec<BigRational>, usize) {
        let (order, mu) = rank_buyers(&self.buyer_prices, &self.seller_price);
        let mut prices = Vec::with_capacity(self.n() + 2);
        prices.push(BigRational::zero());
        prices.extend(order.iter().map(|&i| self.buyer_prices[i].clone()));
        prices.push(self.seller_price.clone());
        (prices, mu)
    }
}
