//! Seeded, splittable randomness.
//!
//! Every sampling operation in this crate takes an explicit `u64` seed and
//! builds its generator with [`seeded_rng`]. Independent sub-streams (one per
//! gradient component, per path step, per trial) are obtained by folding
//! integer tags into the base seed with [`derive_seed`], so results never
//! depend on scheduling or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Construct the crate-wide generator (ChaCha8) from a bare seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a child seed from a base seed and a list of stream tags.
///
/// The same `(base, tags)` always yields the same child; distinct tag lists
/// yield statistically independent streams.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &tag in tags {
        state = splitmix64(state ^ splitmix64(tag.wrapping_add(0x517c_c1b7_2722_0a95)));
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
