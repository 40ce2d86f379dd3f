//! Seeded random streams.
//!
//! Every stochastic component of a simulation draws from its own stream,
//! derived from the run seed and a fixed stream id. Components therefore never
//! perturb each other's sequences: enabling a sleep scheduler does not change
//! which points the clusterer samples.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream ids for the simulation components.
pub mod streams {
    pub const NETWORK: u64 = 1;
    pub const CLUSTERING: u64 = 2;
    pub const ELECTION: u64 = 3;
    pub const SCHEDULER: u64 = 4;
    pub const BASELINE: u64 = 5;
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream keyed by `stream`, unaffected by draws on `self`.
    pub fn fork(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        Self {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
