//! Seed handling.
//!
//! Every random draw comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A run is
//! identified by `(seed, stream)`: the 64-bit seed is expanded with
//! `SeedableRng::seed_from_u64` and the stream selects one of ChaCha's 2⁶⁴
//! independent streams. Independent sub-runs (validation instances, sweep
//! points) use distinct stream numbers under the same seed.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
