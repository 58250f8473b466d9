//! Seeded substreams. Every random quantity comes from ChaCha20 keyed by a
//! 64-bit seed, with the ChaCha stream id selecting the purpose and index.
//! ChaCha is counter based, so a substream's output never depends on how
//! many values other substreams consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const RNG_ALGORITHM: &str = "ChaCha20";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Beta = 1,
    Scores = 2,
    Noise = 3,
    Validation = 4,
}

pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha20Rng {
    debug_assert!(index < 1 << 56);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | index);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`; independent of the
/// dimension so a trial sees the same scores at every `p` of a sweep.
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix64(mix64(master_seed) ^ trial_index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}
