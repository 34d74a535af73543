//! Online trading policies as state machines over arrival events.
//!
//! A policy only ever sees a [`PolicyEvent`]: arrival time, position, the
//! seller flag and the agent's bid. Comparisons are strict under the
//! canonical tie-break carried by [`Bid`].

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpvtError};
use crate::model::{ArrivalSample, Bid, RankedInstance, Thresholds, TradeOutcome, INTERMEDIARY};
use crate::rng::Coin;

/// Sell phase of Algorithm 1 opens after this time.
pub fn alg1_sell_after() -> f64 {
    1.0 / E
}

/// Algorithm 1 may skip the seller only after this time.
pub fn alg1_skip_after() -> f64 {
    (E - 1.0) / E
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Deal,
    Pass,
}

impl Decision {
    pub fn is_deal(self) -> bool {
        self == Decision::Deal
    }
}

/// What the intermediary observes when an agent arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEvent {
    pub time: f64,
    pub is_seller: bool,
    pub price: f64,
    pub tiebreak: u32,
    /// 1-based arrival index.
    pub position: usize,
}

impl PolicyEvent {
    pub fn bid(&self) -> Bid {
        Bid {
            price: self.price,
            tiebreak: self.tiebreak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Inventory {
    #[default]
    None,
    Held,
    Sold,
}

/// Sufficient statistics of the history seen so far.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyState {
    pub inventory: Inventory,
    pub best_buyer_seen: Option<Bid>,
    pub second_best_buyer_seen: Option<Bid>,
    pub best_agent_seen: Option<Bid>,
    pub seller_seen: bool,
    pub stopped: bool,
    last: Option<(usize, f64)>,
}

impl PolicyState {
    pub fn new() -> Self {
        Self::default()
    }

    fn check_order(&self, ev: &PolicyEvent) -> Result<()> {
        if let Some((pos, time)) = self.last {
            if ev.position <= pos || ev.time <= time {
                return Err(SpvtError::Protocol(format!(
                    "event at position {} time {} does not follow position {pos} time {time}",
                    ev.position, ev.time
                )));
            }
        }
        if ev.is_seller && self.seller_seen {
            return Err(SpvtError::Protocol("second seller event".into()));
        }
        Ok(())
    }

    /// True if `bid` beats every agent seen so far (vacuously true at the start).
    fn beats_all_agents(&self, bid: Bid) -> bool {
        self.best_agent_seen.map_or(true, |b| bid > b)
    }

    /// Rank of `bid` among buyers seen so far, itself included (1 = best).
    fn buyer_rank(&self, bid: Bid) -> usize {
        match (self.best_buyer_seen, self.second_best_buyer_seen) {
            (None, _) => 1,
            (Some(b), _) if bid > b => 1,
            (Some(_), None) => 2,
            (Some(_), Some(s)) if bid > s => 2,
            _ => 3,
        }
    }

    fn apply(&mut self, ev: &PolicyEvent, decision: Decision) -> Decision {
        if decision.is_deal() {
            debug_assert!(!self.stopped);
            self.inventory = match (ev.is_seller, self.inventory) {
                (true, Inventory::None) => Inventory::Held,
                (false, Inventory::Held) => {
                    self.stopped = true;
                    Inventory::Sold
                }
                (s, inv) => unreachable!("infeasible deal: seller = {s}, inventory = {inv:?}"),
            };
        } else if ev.is_seller {
            // Passing on the seller ends all trading for the episode.
            self.stopped = true;
        }
        let bid = ev.bid();
        if ev.is_seller {
            self.seller_seen = true;
        } else {
            match self.buyer_rank(bid) {
                1 => {
                    self.second_best_buyer_seen = self.best_buyer_seen;
                    self.best_buyer_seen = Some(bid);
                }
                2 => self.second_best_buyer_seen = Some(bid),
                _ => {}
            }
        }
        if self.beats_all_agents(bid) {
            self.best_agent_seen = Some(bid);
        }
        self.last = Some((ev.position, ev.time));
        decision
    }

    fn can_sell(&self) -> bool {
        !self.stopped && self.inventory == Inventory::Held
    }
}

/// Random transaction policy for the strong ratio.
///
/// Seller: skip (and stop) iff it arrives after (e-1)/e and beats every
/// earlier agent; otherwise buy. Buyer: sell to the first buyer after 1/e
/// that beats every earlier agent, the seller included.
pub fn alg1_step(state: &mut PolicyState, ev: &PolicyEvent) -> Result<Decision> {
    state.check_order(ev)?;
    let d = if ev.is_seller {
        if ev.time > alg1_skip_after() && state.beats_all_agents(ev.bid()) {
            Decision::Pass
        } else {
            Decision::Deal
        }
    } else if state.can_sell() && ev.time > alg1_sell_after() && state.beats_all_agents(ev.bid()) {
        Decision::Deal
    } else {
        Decision::Pass
    };
    Ok(state.apply(ev, d))
}

/// Simple random transaction policy for the weak ratio.
///
/// Seller: buy if some earlier agent beats it, else buy on a fair coin.
/// Buyer: sell iff the item is held and the buyer beats every earlier agent.
pub fn alg2_step(
    state: &mut PolicyState,
    ev: &PolicyEvent,
    coin: &mut dyn Coin,
) -> Result<Decision> {
    state.check_order(ev)?;
    let d = if ev.is_seller {
        if !state.beats_all_agents(ev.bid()) || coin.flip() {
            Decision::Deal
        } else {
            Decision::Pass
        }
    } else if state.can_sell() && state.beats_all_agents(ev.bid()) {
        Decision::Deal
    } else {
        Decision::Pass
    };
    Ok(state.apply(ev, d))
}

/// Double-threshold policy for a zero-price seller.
///
/// Always buys from the seller. Sells to the earliest buyer that is either
/// best-so-far among buyers after `t1`, or second-best-so-far after `t2`.
pub fn alg3_step(state: &mut PolicyState, ev: &PolicyEvent, th: Thresholds) -> Result<Decision> {
    state.check_order(ev)?;
    let d = if ev.is_seller {
        if ev.price != 0.0 {
            return Err(SpvtError::Domain(format!(
                "the double-threshold policy needs a zero seller price, got {}",
                ev.price
            )));
        }
        Decision::Deal
    } else if state.can_sell() {
        match state.buyer_rank(ev.bid()) {
            1 if ev.time > th.t1 => Decision::Deal,
            2 if ev.time > th.t2 => Decision::Deal,
            _ => Decision::Pass,
        }
    } else {
        Decision::Pass
    };
    Ok(state.apply(ev, d))
}

/// Comparison curve: always buy, then the classical 1/e rule on buyers:
/// sell to the first buyer after time 1/e that beats all earlier buyers.
pub fn secretary_step(state: &mut PolicyState, ev: &PolicyEvent) -> Result<Decision> {
    state.check_order(ev)?;
    let sells = !ev.is_seller
        && state.can_sell()
        && ev.time > alg1_sell_after()
        && state.buyer_rank(ev.bid()) == 1;
    let d = if ev.is_seller || sells {
        Decision::Deal
    } else {
        Decision::Pass
    };
    Ok(state.apply(ev, d))
}

/// Policy selection. String ids: `alg1`, `alg2`, `alg3`, `secretary-baseline`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum PolicySpec {
    Alg1,
    Alg2,
    Alg3 { thresholds: Thresholds },
    SecretaryBaseline,
}

impl PolicySpec {
    pub fn id(&self) -> &'static str {
        match self {
            PolicySpec::Alg1 => "alg1",
            PolicySpec::Alg2 => "alg2",
            PolicySpec::Alg3 { .. } => "alg3",
            PolicySpec::SecretaryBaseline => "secretary-baseline",
        }
    }

    /// Parses a policy id; `alg3` takes the supplied thresholds.
    pub fn parse(id: &str, thresholds: Option<Thresholds>) -> Result<Self> {
        match id {
            "alg1" => Ok(PolicySpec::Alg1),
            "alg2" => Ok(PolicySpec::Alg2),
            "alg3" => Ok(PolicySpec::Alg3 {
                thresholds: thresholds
                    .ok_or_else(|| invalid_arg("alg3 needs thresholds (--t1, --t2)"))?,
            }),
            "secretary-baseline" => Ok(PolicySpec::SecretaryBaseline),
            other => Err(invalid_arg(format!(
                "unknown policy {other:?}; expected alg1, alg2, alg3 or secretary-baseline"
            ))),
        }
    }

    pub fn step(
        &self,
        state: &mut PolicyState,
        ev: &PolicyEvent,
        coin: &mut dyn Coin,
    ) -> Result<Decision> {
        match *self {
            PolicySpec::Alg1 => alg1_step(state, ev),
            PolicySpec::Alg2 => alg2_step(state, ev, coin),
            PolicySpec::Alg3 { thresholds } => alg3_step(state, ev, thresholds),
            PolicySpec::SecretaryBaseline => secretary_step(state, ev),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Alg3 { thresholds } => write!(f, "alg3{thresholds}"),
            other => f.write_str(other.id()),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = SpvtError;

    fn from_str(s: &str) -> Result<Self> {
        PolicySpec::parse(s, None)
    }
}

/// Replays one arrival sample through a policy.
pub fn run_episode(
    policy: &PolicySpec,
    instance: &RankedInstance,
    sample: &ArrivalSample,
    coin: &mut dyn Coin,
) -> Result<TradeOutcome> {
    if sample.order.len() != instance.n() + 1 || sample.times.len() != sample.order.len() {
        return Err(invalid_arg(format!(
            "arrival sample has {} agents, instance has {}",
            sample.order.len(),
            instance.n() + 1
        )));
    }
    let seller = instance.seller_id();
    let mut state = PolicyState::new();
    let mut decisions = Vec::with_capacity(sample.order.len());
    let mut holding = false;
    let mut seller_kept = false;
    let mut sold_to = None;

    for (k, (&agent, &time)) in sample.order.iter().zip(&sample.times).enumerate() {
        let bid = instance.bid_of(agent);
        let ev = PolicyEvent {
            time,
            is_seller: agent == seller,
            price: bid.price,
            tiebreak: bid.tiebreak,
            position: k + 1,
        };
        let d = policy.step(&mut state, &ev, coin)?;
        match (ev.is_seller, d) {
            (true, Decision::Deal) => holding = true,
            (true, Decision::Pass) => seller_kept = true,
            (false, Decision::Deal) => {
                if !holding || sold_to.is_some() {
                    return Err(SpvtError::Protocol(format!(
                        "sale to agent {agent} without inventory"
                    )));
                }
                holding = false;
                sold_to = Some(agent);
            }
            (false, Decision::Pass) => {}
        }
        decisions.push(d.is_deal());
    }

    let holder = match (sold_to, seller_kept) {
        (Some(b), _) => b,
        (None, true) => seller,
        (None, false) => INTERMEDIARY,
    };
    Ok(TradeOutcome {
        holder,
        welfare: instance.price_of(holder),
        decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonicalize, gen_instance, sample_arrival, Family, Instance};
    use crate::rng::{trial_rng, FixedCoin, RngCoin};

    fn ev(time: f64, position: usize, is_seller: bool, price: f64, tiebreak: u32) -> PolicyEvent {
        PolicyEvent {
            time,
            is_seller,
            price,
            tiebreak,
            position,
        }
    }

    fn ranked(f: Family) -> RankedInstance {
        canonicalize(&gen_instance(f).unwrap()).unwrap()
    }

    #[test]
    fn alg1_skips_late_best_seller() {
        let mut s = PolicyState::new();
        alg1_step(&mut s, &ev(0.2, 1, false, 1.0, 1)).unwrap();
        assert_eq!(
            alg1_step(&mut s, &ev(0.95, 2, true, 5.0, 3)).unwrap(),
            Decision::Pass
        );
        assert!(s.stopped);
        assert_eq!(
            alg1_step(&mut s, &ev(0.97, 3, false, 9.0, 2)).unwrap(),
            Decision::Pass
        );
    }

    #[test]
    fn alg1_buys_early_seller_regardless_of_price() {
        let mut s = PolicyState::new();
        assert_eq!(
            alg1_step(&mut s, &ev(0.1, 1, true, 100.0, 3)).unwrap(),
            Decision::Deal
        );
        // After the buy, a buyer at 0.5 > 1/e beating all predecessors is sold to.
        assert_eq!(
            alg1_step(&mut s, &ev(0.5, 2, false, 101.0, 1)).unwrap(),
            Decision::Deal
        );
        assert_eq!(s.inventory, Inventory::Sold);
    }

    #[test]
    fn alg1_sell_needs_to_beat_the_seller() {
        let mut s = PolicyState::new();
        alg1_step(&mut s, &ev(0.1, 1, true, 100.0, 3)).unwrap();
        assert_eq!(
            alg1_step(&mut s, &ev(0.5, 2, false, 50.0, 1)).unwrap(),
            Decision::Pass
        );
        // Before 1/e nobody is sold to.
        let mut s = PolicyState::new();
        alg1_step(&mut s, &ev(0.1, 1, true, 0.0, 3)).unwrap();
        assert_eq!(
            alg1_step(&mut s, &ev(0.3, 2, false, 50.0, 1)).unwrap(),
            Decision::Pass
        );
    }

    #[test]
    fn out_of_order_events_are_rejected() {
        let mut s = PolicyState::new();
        alg1_step(&mut s, &ev(0.5, 2, false, 1.0, 1)).unwrap();
        assert!(matches!(
            alg1_step(&mut s, &ev(0.4, 3, false, 1.0, 2)),
            Err(SpvtError::Protocol(_))
        ));
        assert!(matches!(
            alg1_step(&mut s, &ev(0.6, 2, false, 1.0, 2)),
            Err(SpvtError::Protocol(_))
        ));
    }

    #[test]
    fn alg2_coin_only_when_seller_is_current_max() {
        // Seller first: coin decides.
        for outcome in [true, false] {
            let mut s = PolicyState::new();
            let mut coin = FixedCoin::new(outcome);
            let d = alg2_step(&mut s, &ev(0.1, 1, true, 5.0, 3), &mut coin).unwrap();
            assert_eq!(d.is_deal(), outcome);
            assert_eq!(coin.flips, 1);
        }
        // Buyer 10 then seller 5: always buy, no coin.
        let mut s = PolicyState::new();
        let mut coin = FixedCoin::new(false);
        alg2_step(&mut s, &ev(0.1, 1, false, 10.0, 1), &mut coin).unwrap();
        assert_eq!(
            alg2_step(&mut s, &ev(0.2, 2, true, 5.0, 3), &mut coin).unwrap(),
            Decision::Deal
        );
        assert_eq!(coin.flips, 0);
        // Buyer 7 after buyer 10 is not the current max.
        assert_eq!(
            alg2_step(&mut s, &ev(0.3, 3, false, 7.0, 2), &mut coin).unwrap(),
            Decision::Pass
        );
    }

    #[test]
    fn alg3_threshold_rules() {
        let th = Thresholds::new(0.3, 0.8).unwrap();
        let mut s = PolicyState::new();
        alg3_step(&mut s, &ev(0.05, 1, false, 10.0, 1), th).unwrap();
        assert_eq!(
            alg3_step(&mut s, &ev(0.1, 2, true, 0.0, 4), th).unwrap(),
            Decision::Deal
        );
        // Second best so far but before t2.
        assert_eq!(
            alg3_step(&mut s, &ev(0.5, 3, false, 5.0, 2), th).unwrap(),
            Decision::Pass
        );
        // Third among buyers seen, after t2: never.
        assert_eq!(
            alg3_step(&mut s, &ev(0.85, 4, false, 1.0, 3), th).unwrap(),
            Decision::Pass
        );
        // Second best so far after t2.
        assert_eq!(
            alg3_step(&mut s, &ev(0.9, 5, false, 7.0, 5), th).unwrap(),
            Decision::Deal
        );
    }

    #[test]
    fn alg3_rejects_priced_seller() {
        let th = Thresholds::new(0.3, 0.8).unwrap();
        let mut s = PolicyState::new();
        assert!(matches!(
            alg3_step(&mut s, &ev(0.1, 1, true, 0.5, 2), th),
            Err(SpvtError::Domain(_))
        ));
    }

    #[test]
    fn alg3_with_unit_thresholds_never_sells() {
        let inst = ranked(Family::Spike { n: 4 });
        let p = PolicySpec::Alg3 {
            thresholds: Thresholds::new(1.0, 1.0).unwrap(),
        };
        for seed in 0..200 {
            let mut rng = trial_rng(seed, 0);
            let sample = sample_arrival(4, &mut rng).unwrap();
            let out = run_episode(&p, &inst, &sample, &mut RngCoin(&mut rng)).unwrap();
            assert_eq!(out.holder, INTERMEDIARY);
            assert_eq!(out.welfare, 0.0);
        }
    }

    #[test]
    fn alg3_with_zero_first_threshold_is_best_so_far_after_seller() {
        let inst = ranked(Family::Geometric { n: 5, ratio: 0.6 });
        let p3 = PolicySpec::Alg3 {
            thresholds: Thresholds::new(0.0, 1.0).unwrap(),
        };
        for seed in 0..500 {
            let sample = sample_arrival(5, &mut trial_rng(seed, 1)).unwrap();
            let out = run_episode(&p3, &inst, &sample, &mut FixedCoin::new(true)).unwrap();
            let seller_pos = sample.position_of(6);
            let mut best = None::<usize>;
            let mut expect = INTERMEDIARY;
            for (pos, &a) in sample.order.iter().enumerate() {
                if a == 6 {
                    continue;
                }
                let is_best = best.map_or(true, |b| a < b);
                if is_best {
                    best = Some(a);
                    if pos > seller_pos {
                        expect = a;
                        break;
                    }
                }
            }
            assert_eq!(out.holder, expect, "order {:?}", sample.order);
        }
    }

    #[test]
    fn episode_examples() {
        // alg1, seller_spike(1), seller at 0.99 and best so far.
        let inst = ranked(Family::SellerSpike { n: 1 });
        let sample = ArrivalSample::new(vec![1, 2], vec![0.5, 0.99]).unwrap();
        let out =
            run_episode(&PolicySpec::Alg1, &inst, &sample, &mut FixedCoin::new(true)).unwrap();
        assert_eq!(out.holder, 2);
        assert_eq!(out.welfare, 1.0);
        assert_eq!(out.decisions, vec![false, false]);

        // alg3, spike(2), seller then b1 after t1.
        let inst = ranked(Family::Spike { n: 2 });
        let th = Thresholds::new(0.296151, 0.805018).unwrap();
        let sample = ArrivalSample::new(vec![3, 1, 2], vec![0.1, 0.5, 0.7]).unwrap();
        let out = run_episode(
            &PolicySpec::Alg3 { thresholds: th },
            &inst,
            &sample,
            &mut FixedCoin::new(true),
        )
        .unwrap();
        assert_eq!(out.holder, 1);
        assert_eq!(out.welfare, 1.0);
        assert_eq!(out.decisions, vec![true, true, false]);
    }

    #[test]
    fn alg2_is_deterministic_given_seed() {
        let inst = canonicalize(&Instance::new(vec![0.3, 0.9, 0.5, 0.1], 0.4).unwrap()).unwrap();
        let go = || {
            let mut rng = trial_rng(42, 7);
            let sample = sample_arrival(4, &mut rng).unwrap();
            run_episode(&PolicySpec::Alg2, &inst, &sample, &mut RngCoin(&mut rng)).unwrap()
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let inst = ranked(Family::Spike { n: 3 });
        let sample = ArrivalSample::new(vec![1, 2], vec![0.1, 0.2]).unwrap();
        assert!(run_episode(&PolicySpec::Alg1, &inst, &sample, &mut FixedCoin::new(true)).is_err());
    }

    #[test]
    fn policy_ids_parse() {
        assert_eq!("alg1".parse::<PolicySpec>().unwrap(), PolicySpec::Alg1);
        assert_eq!(
            "secretary-baseline".parse::<PolicySpec>().unwrap(),
            PolicySpec::SecretaryBaseline
        );
        assert!("alg3".parse::<PolicySpec>().is_err());
        let th = Thresholds::new(0.1, 0.2).unwrap();
        assert_eq!(
            PolicySpec::parse("alg3", Some(th)).unwrap(),
            PolicySpec::Alg3 { thresholds: th }
        );
        assert!("alg9".parse::<PolicySpec>().is_err());
    }
}
