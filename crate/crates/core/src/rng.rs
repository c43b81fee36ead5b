//! Pinned random number generation.
//!
//! Every random draw in the crate goes through [`PinnedRng`], a ChaCha8 stream
//! seeded with `ChaCha8Rng::seed_from_u64`. Uniform doubles take the top 53
//! bits of one `next_u64` call; normal deviates use the cosine branch of the
//! Box-Muller transform on two consecutive uniforms, evaluated with `libm` so
//! results do not depend on the platform math library.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct PinnedRng {
    inner: ChaCha8Rng,
}

impl PinnedRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` of the generator seeded with `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Standard normal deviate, N(0, 1).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        // 1 - u1 lies in (0, 1], so the log is finite.
        let r = libm::sqrt(-2.0 * libm::log(1.0 - u1));
        r * libm::cos(2.0 * std::f64::consts::PI * u2)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // Rejection sampling removes modulo bias.
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.inner.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}
