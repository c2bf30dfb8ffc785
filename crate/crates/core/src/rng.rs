//! Seeded random streams.
//!
//! Raw 64-bit words come from ChaCha20 (`rand_chacha::ChaCha20Rng`, seeded
//! with `seed_from_u64`). Normals use the cosine branch of Box–Muller and
//! consume exactly two words each:
//!
//! ```text
//! u1 = ((w1 >> 11) + 1) * 2^-53        in (0, 1]
//! u2 = (w2 >> 11) * 2^-53              in [0, 1)
//! z  = sqrt(-2 ln u1) * cos(2π u2)
//! ```

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Standard normal sample.
    pub fn normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * INV_2_53;
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normals(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.normal()).collect()
    }
}
