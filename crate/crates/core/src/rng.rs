//! Seeded random streams.
//!
//! Every run draws from a xoshiro256++ generator. Stream `k` of a base seed
//! is the generator seeded with `seed_from_u64(seed)` and advanced by `k`
//! calls to `jump()` (2^128 draws each), so independent sweep cells never
//! overlap.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

pub type SimRng = Xoshiro256PlusPlus;

/// Name recorded in run metadata.
pub const RNG_ALGORITHM: &str = "xoshiro256++ (seed_from_u64, stream k = k jumps of 2^128)";

pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

/// Seed of a sweep cell: a SplitMix64 hash of the base seed and the cell
/// coordinates, independent of grid order.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut acc = base;
    for &p in parts {
        acc = SplitMix64::seed_from_u64(acc ^ p).next_u64();
    }
    acc
}
