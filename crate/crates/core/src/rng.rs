//! Deterministic per-stream random number generation.
//!
//! Every (seed, stream, substream) triple maps to its own ChaCha8 stream so
//! paths can be simulated in any order or on any thread with identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `stream` (e.g. a factor id) and `substream` (e.g. a path id).
pub fn stream_rng(seed: u64, stream: u64, substream: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5851_F42D_4C95_7F2D)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(substream);
    rng
}
