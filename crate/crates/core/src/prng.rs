//! Seeded, portable randomness.
//!
//! Every randomized operation in this crate draws from ChaCha12 keyed by a
//! caller-supplied 64-bit seed. Sampling loops that run per-item (regularity
//! samples, retry loops) derive an independent substream per item index, so
//! reports are identical no matter how the work is scheduled. Range sampling
//! is plain rejection sampling on the raw 64-bit output, so results do not
//! depend on any library's distribution internals.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

pub struct SeededRng {
    inner: ChaCha12Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `index` under the same seed.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform value in `0..bound` by rejection sampling. `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        if bound.is_power_of_two() {
            return self.next_u64() & (bound - 1);
        }
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// Uniform permutation of `0..k`.
    pub fn permutation(&mut self, k: usize) -> Vec<usize> {
        let mut xs: Vec<usize> = (0..k).collect();
        self.shuffle(&mut xs);
        xs
    }

    /// Uniform `k`-subset of the given pool, returned sorted.
    pub fn subset_of<T: Copy + Ord>(&mut self, pool: &[T], k: usize) -> Vec<T> {
        assert!(k <= pool.len());
        let mut xs = pool.to_vec();
        for i in 0..k {
            let j = i + self.below((xs.len() - i) as u64) as usize;
            xs.swap(i, j);
        }
        xs.truncate(k);
        xs.sort_unstable();
        xs
    }
}
