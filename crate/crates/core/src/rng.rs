//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator (a 64-bit
//! counter-based stream cipher) seeded with the user's 64-bit seed. Each
//! consumer selects its own stream id, so adding draws in one place never
//! perturbs another. Stream ids are `offset + index` with the fixed offsets
//! in [`streams`]. Normal variates use the Box-Muller transform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed stream offsets, one per (module, purpose).
pub mod streams {
    pub const SIGNAL: u64 = 1 << 32;
    pub const SYSTEM: u64 = 2 << 32;
    pub const DYNSYS_PARAMS: u64 = 3 << 32;
    pub const DYNSYS_NOISE: u64 = 4 << 32;
    pub const METRIC_PAIRS: u64 = 5 << 32;
    pub const EMBEDDING: u64 = 6 << 32;
    pub const SPLIT: u64 = 7 << 32;
    pub const FEATURES: u64 = 8 << 32;
}

#[derive(Clone, Debug)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn index_u64(&mut self, n: u64) -> u64 {
        self.rng.random_range(0..n)
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}
