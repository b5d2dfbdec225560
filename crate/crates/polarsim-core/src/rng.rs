//! Deterministic, splittable randomness.
//!
//! Every replica draws from its own counter-based ChaCha stream keyed by
//! `(master_seed, stream_index)`, so results do not depend on host, thread
//! schedule, or how work is sliced across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// One independent random stream.
///
/// Equal `(master_seed, stream_index)` pairs always reproduce the identical
/// sequence; distinct stream indices select disjoint ChaCha streams under the
/// same key.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self { master_seed, stream_index, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Words consumed so far; the position in the counter-based sequence.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest);
    }
}
