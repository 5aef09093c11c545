//! Seed derivation for independent, reproducible random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 scrambling step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a generator for `(seed, stream, source)`.
///
/// `stream` identifies a run (e.g. one sweep point), `source` one noise
/// process inside that run, so toggling one process never shifts the
/// draws of another.
pub fn stream_rng(seed: u64, stream: u64, source: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ source.wrapping_mul(0xA24B_AED4_963E_E407));
    ChaCha8Rng::seed_from_u64(key)
}
