//! Keyed random streams.
//!
//! Every stream is a ChaCha8 generator whose seed is derived from a base seed
//! and a key path such as (participant, session, purpose). Streams never share
//! state, so output does not depend on generation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a key path into a base seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(seed), |acc, k| splitmix64(acc ^ splitmix64(*k)))
}

pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}
