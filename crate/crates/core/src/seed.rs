//! Named seed derivation.
//!
//! Every random stage gets its own stream derived from one global seed and a
//! stable stage name, so a stage can be re-run in isolation and still see the
//! same random numbers as in a full pipeline run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every random stage.
pub type StageRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for the stage `name` under `global`.
pub fn derive_seed(global: u64, name: &str) -> u64 {
    mix64(global ^ mix64(fnv1a(name.as_bytes())))
}

/// Seed for the `index`-th independent sub-task of a stage (a tree, a walk, a repetition).
pub fn child_seed(parent: u64, index: u64) -> u64 {
    mix64(parent ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn rng_from(seed: u64) -> StageRng {
    StageRng::seed_from_u64(seed)
}
