//! Deterministic RNG stream derivation. Every run, episode, and generated
//! instance draws from its own ChaCha stream split off a single master seed,
//! so parallel and sequential execution consume identical randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An independent stream derived from `(master seed, stream id)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
