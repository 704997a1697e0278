//! Seeded pseudo-random number generation.
//!
//! Every stochastic routine in this crate draws from an explicitly passed
//! [`RunRng`] handle. There is no global generator: a run seeded with the
//! same 64-bit value replays bit-identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The single generator type used throughout the crate.
pub type RunRng = ChaCha8Rng;

/// Creates the generator for a run from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> RunRng {
    RunRng::seed_from_u64(seed)
}

/// Derives an independent sub-stream from a base seed.
///
/// Used to give e.g. the measurement-noise stream of a run its own
/// generator so that optimizer draws and noise draws never interleave.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    // splitmix64 over the combined value; decorrelates nearby seeds.
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
