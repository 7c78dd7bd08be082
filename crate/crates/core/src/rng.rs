//! Deterministic random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream identified by a
//! master seed plus a stream index, so work items can run in any order or on
//! any number of threads and still produce identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SparRng = ChaCha8Rng;

/// Stream reserved for cross-validation fold assignment.
pub(crate) const FOLD_STREAM: u64 = u64::MAX;

/// Stream for member `k` of an ensemble fitted with `seed`.
pub fn stream(seed: u64, index: u64) -> SparRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes several integers into a single 64-bit seed (splitmix64 finalizer).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = splitmix(h);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
