//! Reproducible random streams.
//!
//! A [`RandomStream`] names a ChaCha8 keystream: the 64-bit seed is expanded into the
//! key and `stream_id` selects the ChaCha stream (nonce). Draws are a pure function of
//! `(seed, stream_id)` on every platform. Monte Carlo loops give sample `i` its own
//! stream so results do not depend on thread count or scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream { seed, stream_id }
    }

    /// The stream offset by `index`; used to give each sample of a batch its own stream.
    pub fn substream(&self, index: u64) -> Self {
        RandomStream {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(index),
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng { inner }
    }
}

/// Generator instantiated from a [`RandomStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Uniform integer in `0..n`; `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.inner.next_u32() & 1 == 1
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen test vectors: changing the generator or its seeding breaks these.
    #[test]
    fn test_vectors() {
        let mut r = RandomStream::new(0, 0).rng();
        let first: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        assert_eq!(first, TV_SEED0_STREAM0);
        let mut r = RandomStream::new(42, 7).rng();
        let first: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        assert_eq!(first, TV_SEED42_STREAM7);
        let mut r = RandomStream::new(42, 7).rng();
        let draws: Vec<usize> = (0..8).map(|_| r.below(6)).collect();
        assert_eq!(draws, TV_BELOW6);
    }

    const TV_SEED0_STREAM0: [u64; 3] = [
        13080132717333068652,
        8594738769458413623,
        12896916468484187878,
    ];
    const TV_SEED42_STREAM7: [u64; 3] = [
        2370525664269707216,
        6019739031913071421,
        11352947354031309824,
    ];
    const TV_BELOW6: [usize; 8] = [3, 2, 1, 1, 1, 2, 3, 1];

    #[test]
    fn streams_differ_and_repeat() {
        let a: Vec<u64> = {
            let mut r = RandomStream::new(5, 1).rng();
            (0..16).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RandomStream::new(5, 1).rng();
            (0..16).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RandomStream::new(5, 2).rng();
            (0..16).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(
            RandomStream::new(5, 1).substream(1),
            RandomStream::new(5, 2)
        );
    }
}
