//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built from an
//! explicit 64-bit seed and a purpose-specific stream id. ChaCha streams are
//! independent for distinct stream ids under the same seed, so one trial seed
//! can feed the graph sampler, the opinion sampler and the swing selection
//! without the draws overlapping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids. Adding a new consumer of randomness means adding a new id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 0,
    Opinions = 1,
    Swing = 2,
    Jumbledness = 3,
    Lemmas = 4,
}

/// Builds the generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`. Depends only on the pair, never on
/// scheduling, so parallel and sequential runs see the same seeds.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
