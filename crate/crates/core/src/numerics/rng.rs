//! Seeded, stream-addressable randomness.
//!
//! Every consumer of randomness owns an [`RngStream`] keyed by
//! `(seed, stream_id)`. Streams are ChaCha8 keystreams: the seed fixes the
//! key, the stream id selects the nonce, so two streams never overlap and
//! the sequence is identical on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Well-known stream ids. Per-worker streams add the worker id to a base.
pub mod streams {
    pub const DATA: u64 = 1;
    pub const PARTITION: u64 = 2;
    pub const INIT: u64 = 3;
    pub const VALIDATION: u64 = 4;
    pub const PROBE: u64 = 5;
    pub const WORKER_BATCH_BASE: u64 = 1 << 32;
    pub const WORKER_DELAY_BASE: u64 = 2 << 32;

    pub fn worker_batch(id: usize) -> u64 {
        WORKER_BATCH_BASE + id as u64
    }

    pub fn worker_delay(id: usize) -> u64 {
        WORKER_DELAY_BASE + id as u64
    }
}

/// Anything that yields uniform draws in `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform index in `0..n`. Sampled through `u64` so the result does not
    /// depend on the platform's pointer width.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        self.inner.random_range(0..n as u64) as usize
    }

    /// Fisher-Yates shuffle driven by [`RngStream::index`].
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

impl UniformSource for RngStream {
    fn next_uniform(&mut self) -> f64 {
        self.uniform()
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
