//! Random streams.
//!
//! Every simulation uses ChaCha8 (`rand_chacha` 0.3). The 256-bit key is
//! expanded from the user seed with `SeedableRng::seed_from_u64`, and trial
//! `k` reads from ChaCha stream `k` starting at word 0. A trial's draws
//! therefore depend only on `(seed, k)`, never on which worker ran it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Sub-stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Source of the fair coin used by randomized policies.
pub trait Coin {
    fn flip(&mut self) -> bool;
}

/// Coin backed by an RNG.
pub struct RngCoin<'a, R: RngCore + ?Sized>(pub &'a mut R);

impl<R: RngCore + ?Sized> Coin for RngCoin<'_, R> {
    fn flip(&mut self) -> bool {
        self.0.next_u32() & 1 == 1
    }
}

/// Coin with a scripted outcome; counts how often it was asked.
#[derive(Debug, Clone, Copy)]
pub struct FixedCoin {
    pub outcome: bool,
    pub flips: u32,
}

impl FixedCoin {
    pub fn new(outcome: bool) -> Self {
        FixedCoin { outcome, flips: 0 }
    }
}

impl Coin for FixedCoin {
    fn flip(&mut self) -> bool {
        self.flips += 1;
        self.outcome
    }
}
