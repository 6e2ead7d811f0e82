//! Seeded randomness.
//!
//! All sampling in this crate goes through ChaCha8 (`rand_chacha::ChaCha8Rng`),
//! a counter-based stream cipher generator that is reproducible across
//! platforms for a given `u64` seed. Independent streams for repeated runs
//! are derived with a SplitMix64 finalizer so that `(seed, stream)` pairs
//! never collide for small stream indices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mix of `seed` and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = (0..4).map(|_| rng_from_seed(7).random()).collect();
        let mut r = rng_from_seed(7);
        let first: u64 = r.random();
        assert_eq!(a[0], first);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
