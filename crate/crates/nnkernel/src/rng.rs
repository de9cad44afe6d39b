//! Deterministic random streams.
//!
//! Every stochastic op takes an explicit seed. Seeds for independent streams
//! (one per epoch, batch draw, layer, ...) are derived statelessly from a base
//! seed and a path of indices, so any stream can be recreated without
//! replaying the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all kernel randomness.
pub type KernelRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream addressed by `path` under `base`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x5851_F42D_4C95_7F2D))))
}

pub fn rng_from_seed(seed: u64) -> KernelRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from_seed(derive_seed(base, path))`.
pub fn stream(base: u64, path: &[u64]) -> KernelRng {
    rng_from_seed(derive_seed(base, path))
}
