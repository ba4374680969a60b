//! Seeding helpers. All randomness in the crate flows through explicit
//! `ChaCha8Rng` generators so runs are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StdRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> StdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index (splitmix64 finalizer) so that
/// sibling streams are decorrelated.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
