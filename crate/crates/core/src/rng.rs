//! Seeded generators.
//!
//! Every random choice in the crate draws from ChaCha8 (`rand_chacha`),
//! seeded with `seed_from_u64(seed)` and then moved to a numbered stream with
//! `set_stream(stream)`. Streams keep independent draws (per sample, per
//! agent) reproducible regardless of evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
