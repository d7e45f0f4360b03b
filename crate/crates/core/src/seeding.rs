//! Deterministic RNG construction.
//!
//! Every random draw in the crate flows through ChaCha8 streams created here.
//! Child seeds are derived with a splitmix64 finalizer so that independent
//! consumers (test sets, per-run training streams, scenario parameter draws)
//! get decorrelated streams from one master seed without sharing state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG seeded directly from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the `index`-th child seed of `seed`.
///
/// splitmix64 finalizer over `seed + (index + 1) * GOLDEN`; the +1 keeps
/// child 0 distinct from the parent's own finalized value.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for the `index`-th child stream of `seed`.
pub fn child_rng(seed: u64, index: u64) -> ChaCha8Rng {
    rng_from_seed(child_seed(seed, index))
}
