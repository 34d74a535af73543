//! Online trading with a single item, one seller and `n` buyers arriving in
//! random order, mediated by an intermediary that can buy, hold and resell.
//!
//! The crate provides the instance model, the online policies, the offline
//! benchmarks, exact expectations by quadrature and rational arithmetic,
//! linear-programming bounds with dual certificates, a deterministic
//! parallel Monte Carlo simulator, and a brute-force enumeration oracle.

pub mod error;
pub mod exact;
pub mod lp;
pub mod model;
pub mod montecarlo;
pub mod offline;
pub mod oracle;
pub mod policies;
pub mod quadrature;
pub mod rng;
pub mod sum;

pub use error::{Result, SpvtError};
pub use model::{
    canonicalize, gen_instance, sample_arrival, ArrivalSample, ExactInstance, Family, Instance,
    RankedInstance, Thresholds, TradeOutcome, INTERMEDIARY,
};
pub use offline::{strong_opt, weak_opt_expected, weak_opt_expected_exact, weak_opt_given_order};
pub use policies::{run_episode, PolicySpec};
pub use rng::{trial_rng, Coin, FixedCoin, RngCoin};
