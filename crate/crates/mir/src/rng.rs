//! Deterministic Gaussian random numbers.
//!
//! Streams are ChaCha12 keyed by explicit 64-bit seeds, and normals come
//! from a hand-rolled Box-Muller so that output is reproducible across
//! library versions, platforms, and thread counts.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::PI;

/// SplitMix64 finalizer, used to whiten and combine seed material.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a list of labels (model
/// index, series length, repetition number, ...). Any change to any part
/// yields an unrelated child.
pub fn mix_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix(master);
    for &p in parts {
        h = splitmix(h ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    h
}

/// A seeded standard-normal stream.
pub struct GaussianRng {
    chacha: ChaCha12Rng,
    spare: Option<f64>,
}

impl GaussianRng {
    pub fn seed_from(seed: u64) -> Self {
        Self { chacha: ChaCha12Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on (0, 1], from the top 53 bits of the stream.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.chacha.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.chacha.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// One standard normal deviate (Box-Muller, pairs cached).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.uniform_open0().ln()).sqrt();
        let theta = 2.0 * PI * self.uniform();
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn fill_standard_normal(&mut self, buf: &mut [f64]) {
        for slot in buf {
            *slot = self.standard_normal();
        }
    }
}
