//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 generator whose
//! 256-bit key is the SplitMix64 expansion of a `u64` seed. Replication
//! harnesses derive per-task seeds with [`derive_seed`], so any subset of
//! replications can be rerun in isolation and produces identical output on
//! every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// The generator used for all simulation.
pub type SimRng = ChaCha20Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha20 generator keyed by the SplitMix64 expansion of `seed`.
pub fn rng_from_seed(seed: u64) -> SimRng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha20Rng::from_seed(key)
}

/// Seed for sub-task `index` of purpose `purpose` under `base`.
///
/// Distinct `(index, purpose)` pairs give unrelated seeds; the mapping is a
/// pure function so replications can be regenerated out of order.
pub fn derive_seed(base: u64, index: u64, purpose: u64) -> u64 {
    let mut state = base;
    let a = splitmix64(&mut state);
    let mut state = a ^ index.wrapping_mul(GOLDEN);
    let b = splitmix64(&mut state);
    let mut state = b ^ purpose.rotate_left(32);
    splitmix64(&mut state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = rng_from_seed(42).random_iter().take(8).collect();
        let b: Vec<u64> = rng_from_seed(42).random_iter().take(8).collect();
        assert_eq!(a, b);
        let c: Vec<u64> = rng_from_seed(43).random_iter().take(8).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn derived_seeds_differ() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..200 {
            for p in 0..3 {
                assert!(seen.insert(derive_seed(7, r, p)));
            }
        }
        assert_eq!(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
    }
}
