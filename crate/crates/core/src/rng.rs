//! The engine random stream and seed derivation.
//!
//! All randomness in the optimizers comes from one [`EngineRng`]
//! (ChaCha8, seeded through `seed_from_u64`). Streams for independent work
//! units (sweep cells and repetitions) are keyed by [`derive_seed`], so a
//! sweep can be split across threads or hosts and still reproduce exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type EngineRng = ChaCha8Rng;

pub fn engine_rng(seed: u64) -> EngineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with two counters into a fresh 64-bit seed.
///
/// `derive_seed(b, i, j) = s(s(s(b) ^ i) ^ j)` with `s` the SplitMix64
/// finalizer (golden-ratio increment, then the 30/27/31 xor-shift-multiply
/// rounds). The sweep uses `i = cell index`, `j = repetition index`.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ a) ^ b)
}
