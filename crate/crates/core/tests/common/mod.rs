#![allow(dead_code)]

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recwalk::chain::FiniteChain;
use recwalk::weight::Q;

/// Row-stochastic matrix from nonnegative integer weights; a zero row
/// becomes absorbing.
pub fn chain_from_weights(w: &[Vec<u32>]) -> FiniteChain {
    let rows = w
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u32 = row.iter().sum();
            row.iter()
                .enumerate()
                .map(|(j, &x)| match total {
                    0 => Q::from_integer(BigInt::from(u32::from(i == j))),
                    t => Q::new(BigInt::from(x), BigInt::from(t)),
                })
                .collect()
        })
        .collect();
    FiniteChain::new(rows).expect("stochastic")
}

/// A random chain on at most `max_states` states with sparse small weights.
pub fn random_chain(rng: &mut ChaCha8Rng, max_states: usize) -> FiniteChain {
    let n = rng.random_range(1..=max_states);
    let w: Vec<Vec<u32>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| if rng.random_bool(0.5) { rng.random_range(1..=4) } else { 0 })
                .collect()
        })
        .collect();
    chain_from_weights(&w)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
