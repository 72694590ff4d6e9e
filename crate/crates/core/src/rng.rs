//! Seeded, splittable random streams.
//!
//! Streams are backed by the ChaCha8 block cipher in counter mode, so a
//! `(seed, stream_id)` pair names a fixed, platform-independent sequence.
//!
//! Normal deviates use the Box-Muller transform: each pair of uniforms
//! `u1 in (0, 1]`, `u2 in [0, 1)` yields `r cos(2 pi u2)` and then
//! `r sin(2 pi u2)` with `r = sqrt(-2 ln u1)`. The second deviate is cached
//! and returned by the next call.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vector::DenseVector;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// An independent stream identified by `(seed, stream_id)`.
    pub fn substream(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream: stream_id,
            inner,
            spare_normal: None,
        }
    }

    /// Derives a child stream of this stream's seed.
    pub fn split(&self, stream_id: u64) -> Self {
        Self::substream(self.seed, stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// One standard normal deviate.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.gaussian();
        }
    }
}

/// `n` i.i.d. standard normal draws.
pub fn sample_gaussian(rng: &mut RngStream, n: usize) -> DenseVector {
    let mut out = vec![0.0; n];
    rng.fill_gaussian(&mut out);
    DenseVector::from_vec_unchecked(out)
}
