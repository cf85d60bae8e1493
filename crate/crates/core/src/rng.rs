//! Seedable, splittable random streams.
//!
//! Every stochastic routine takes its stream explicitly. Independent
//! substreams are ChaCha8 streams selected by hashing a key path, so a
//! replicate's draws depend only on `(seed, key)` and never on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream { inner, seed, stream }
    }

    /// Independent stream identified by `key` under the same seed.
    pub fn substream(seed: u64, key: &[u64]) -> Self {
        let mut h = 0x5851_f42d_4c95_7f2d_u64;
        for &k in key {
            h = splitmix64(h ^ splitmix64(k));
        }
        Self::with_stream(seed, h)
    }

    /// Child of this stream's seed keyed by `key`.
    pub fn split(&self, key: &[u64]) -> Self {
        let mut full = alloc::vec::Vec::with_capacity(key.len() + 1);
        full.push(self.stream);
        full.extend_from_slice(key);
        Self::substream(self.seed, &full)
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
