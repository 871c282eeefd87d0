//! Exact samplers for one vertical excursion of the diagonal walk.

use std::sync::OnceLock;

use rand::RngCore;
use rand_distr::{Binomial, Distribution};

use super::first_return::survival;
use crate::rng::open_unit;

const TABLE_LEN: usize = 1 << 16;

/// Half-lengths beyond this are reported as exhausted.
pub const HALF_LENGTH_CAP: u64 = 1 << 62;

fn survival_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..TABLE_LEN as u64).map(survival).collect())
}

/// Draw `M = R₁ / 2` by inversion of `P(M > m) = u_m`; `None` past the cap.
pub fn sample_half_length<R: RngCore>(rng: &mut R) -> Option<u64> {
    let u = open_unit(rng);
    let table = survival_table();
    let m = table.partition_point(|s| *s >= u);
    if m < TABLE_LEN {
        return Some(m as u64);
    }
    if survival(HALF_LENGTH_CAP) >= u {
        return None;
    }
    let (mut lo, mut hi) = (TABLE_LEN as u64 - 1, HALF_LENGTH_CAP);
    // survival(lo) >= u > survival(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if survival(mid) >= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Sum of `steps` independent fair ±1 steps.
pub fn sample_displacement<R: RngCore>(rng: &mut R, steps: u64) -> i64 {
    let heads = if steps <= 64 {
        let bits = if steps == 64 {
            rng.next_u64()
        } else {
            rng.next_u64() & ((1u64 << steps) - 1)
        };
        bits.count_ones() as u64
    } else {
        Binomial::new(steps, 0.5).expect("valid binomial").sample(rng)
    };
    2 * heads as i64 - steps as i64
}

/// One draw of `(R₁, S_{R₁})`: the return time and the horizontal position
/// at the first vertical return, from the origin.
pub fn sample_excursion<R: RngCore>(rng: &mut R) -> Option<(u64, i64)> {
    let m = sample_half_length(rng)?;
    Some((2 * m, sample_displacement(rng, 2 * m)))
}

/// One draw of `S_{R₁}`, i.e. from `ν`.
pub fn sample_nu<R: RngCore>(rng: &mut R) -> Option<i64> {
    sample_excursion(rng).map(|(_, s)| s)
}
