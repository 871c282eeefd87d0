//! Brute-force oracles and generators shared by the acceptance run.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recwalk::chain::FiniteChain;
use recwalk::weight::Q;

/// Count ±1 paths of length `n` whose first return to 0 is at time `n`.
pub fn enumerate_first_returns(n: u32) -> u64 {
    assert!(n < 32, "enumeration limited to n < 32");
    (0u32..1 << n)
        .filter(|bits| {
            let mut s = 0i32;
            for k in 0..n {
                s += if bits >> k & 1 == 1 { 1 } else { -1 };
                if s == 0 {
                    return k == n - 1;
                }
            }
            false
        })
        .count() as u64
}

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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_counts() {
        // 2·Cat(m-1) paths first return at 2m.
        let counts: Vec<u64> = (1..=5).map(|m| enumerate_first_returns(2 * m)).collect();
        assert_eq!(counts, vec![2, 2, 4, 10, 28]);
    }

    #[test]
    fn random_chains_are_stochastic() {
        let mut r = rng(1);
        for _ in 0..20 {
            let c = random_chain(&mut r, 6);
            assert!((1..=6).contains(&c.n()));
        }
    }
}
