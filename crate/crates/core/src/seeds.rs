//! Seed derivation helpers. Every random stream in the crate is a ChaCha8
//! generator seeded through [`mix`], so runs are reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two seeds into one stream seed.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.rotate_left(17) ^ 0xA5A5_5A5A_C3C3_3C3C)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Domain tags keep independent streams apart.
pub mod tag {
    pub const LAYOUT: u64 = 1;
    pub const OBJECTS: u64 = 2;
    pub const TASK: u64 = 3;
    pub const DATASET: u64 = 4;
    pub const TRAIN: u64 = 5;
    pub const EVAL: u64 = 6;
}
