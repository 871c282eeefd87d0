//! Counter-based random streams.
//!
//! A stream is a ChaCha8 keystream: the key is derived from the user seed and
//! a purpose tag, and the 64-bit ChaCha stream id is the sample index. Sample
//! `i` therefore sees the same numbers whichever thread runs it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Disjoint key families, so that e.g. the walk and the shift variables of a
/// single sample never share random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Path = 0x7061_7468,
    Excursion = 0x6578_6375,
    Shift = 0x7368_6966,
    Direct = 0x6469_7265,
    Absorption = 0x6162_736f,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for sample `index` of the experiment keyed by `seed`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ (purpose as u64).rotate_left(17);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform in (0, 1], 53 bits.
#[inline]
pub fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}
