//! Deterministic random streams for Monte Carlo trials.
//!
//! Every trial owns one ChaCha stream (selected by the trial index) under a
//! key derived from the master seed. Each logical purpose reads from a
//! disjoint block of that stream, so results do not depend on how trials are
//! partitioned across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Logical purpose of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Channels = 0,
    TrainingNoise = 1,
    Auxiliary = 2,
}

const BLOCK_SHIFT: u32 = 56;

/// Factory for per-trial, per-purpose generators.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    key: [u8; 32],
}

impl TrialStreams {
    pub fn new(master_seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut expander = ChaCha8Rng::seed_from_u64(master_seed);
        rand::RngCore::fill_bytes(&mut expander, &mut key);
        Self { key }
    }

    pub fn rng(&self, trial: u64, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(trial);
        rng.set_word_pos((stream as u128) << BLOCK_SHIFT);
        rng
    }
}
