//! Named random streams.
//!
//! Every run derives all of its randomness from a single seed. Each consumer
//! draws from its own ChaCha stream so that a change in how one component uses
//! randomness never shifts the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    GoalSelection = 1,
    Exploration = 2,
    Environment = 3,
    RegionSplit = 4,
    TestDatabase = 5,
}

pub fn stream(seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
