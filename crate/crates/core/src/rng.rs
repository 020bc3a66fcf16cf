//! Seeded, stream-splittable randomness.
//!
//! Every sampler takes a generator by `&mut`; generators are created from an
//! [`RngState`] so that a `(seed, counter)` pair always names the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub counter: u64,
}

impl RngState {
    pub fn new(seed: u64, counter: u64) -> Self {
        Self { seed, counter }
    }

    /// ChaCha8 keyed by `seed`, positioned on stream `counter`.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.counter);
        rng
    }

    /// The state for an independent child stream.
    pub fn child(&self, index: u64) -> RngState {
        RngState::new(derive_seed(self.seed, self.counter, index), 0)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `master ⊕ hash(a, b)`; stable across platforms and Rust versions.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    master ^ mix64(mix64(a) ^ b.rotate_left(32) ^ 0xA5A5_A5A5_5A5A_5A5A)
}
