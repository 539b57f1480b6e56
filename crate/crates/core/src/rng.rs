//! Counter-based random streams.
//!
//! A [`KeyedRng`] is a pure function of `(key, counter)`: the `n`th output of
//! a stream is `mix(key + n * GOLDEN)`, the SplitMix64 output function applied
//! to a Weyl sequence. Keys are derived from an ordered list of integers such
//! as `(master_seed, epoch, image_index)`, so every image, epoch and episode
//! gets an independent stream no matter which thread processes it.
//!
//! The generator is versioned by [`STREAM_VERSION`]; changing the mixing
//! constants or the key derivation must bump it.

use rand_core::{impls, RngCore};

/// Identifies the stream construction below.
pub const STREAM_VERSION: &str = "splitmix64-keyed/1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A random stream addressed by a 64-bit key and a draw counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyedRng {
    key: u64,
    counter: u64,
}

impl KeyedRng {
    /// Stream keyed by a single seed.
    pub fn new(seed: u64) -> Self {
        Self::from_key(mix(seed ^ 0x6A09_E667_F3BC_C908))
    }

    /// Stream keyed by an ordered list of integers.
    pub fn from_parts(parts: &[u64]) -> Self {
        let mut key = 0x6A09_E667_F3BC_C908u64;
        for &part in parts {
            key = mix(key.wrapping_add(GOLDEN) ^ mix(part));
        }
        Self::from_key(key)
    }

    fn from_key(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// A child stream keyed by this stream's key plus `tag`. The parent's
    /// counter is left untouched.
    pub fn fork(&self, tag: u64) -> Self {
        Self::from_key(mix(self.key.wrapping_add(GOLDEN) ^ mix(tag ^ 0x3C6E_F372_FE94_F82B)))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Number of 64-bit words drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// The `index`th word of the stream without advancing it.
    pub fn word_at(&self, index: u64) -> u64 {
        mix(self.key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }
}

impl RngCore for KeyedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let out = self.word_at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
