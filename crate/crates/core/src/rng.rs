//! Reproducible random streams.
//!
//! A sweep has one 64-bit master seed. Frame `i` draws from the ChaCha8
//! stream `(seed, i)`, so any frame can be regenerated on its own and the
//! results do not depend on how frames are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream owned by frame `frame` of the run seeded with `seed`.
pub fn frame_stream(seed: u64, frame: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}
