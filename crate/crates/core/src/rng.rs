//! The crate-wide seeded generator.
//!
//! Every random draw (initialization, OOV rows, shuffling, dropout masks) goes
//! through ChaCha8 seeded with a `u64`, so a seed fully determines a run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-streams of one seed.
pub mod streams {
    pub const EMBEDDINGS: u64 = 1;
    pub const INIT: u64 = 2;
    pub const TRAIN: u64 = 3;
}

/// A generator for `seed` positioned on a numbered ChaCha stream.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
