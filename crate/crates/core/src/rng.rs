//! Seedable deterministic random state.
//!
//! Every stochastic operation in the crate takes an explicit `&mut RngState`.
//! The generator is ChaCha8, which produces the same stream on every platform
//! for the same seed, so datasets can be regenerated from their seed alone.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for the same seed. Stream 0 is the one returned by [`RngState::new`].
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw on `[-0.5, 0.5)`.
    pub fn centered_uniform(&mut self) -> f64 {
        self.uniform() - 0.5
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Draw from `N(mean, sd²)`. A zero `sd` returns `mean` exactly.
    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngState {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngState::new(7);
        let mut b = RngState::new(7);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngState::with_stream(7, 0);
        let mut b = RngState::with_stream(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(RngState::with_stream(3, 0), RngState::new(3));
    }

    #[test]
    fn zero_sd_normal_is_mean() {
        let mut rng = RngState::new(1);
        assert_eq!(rng.normal(10.0, 0.0), 10.0);
    }

    #[test]
    fn centered_uniform_range() {
        let mut rng = RngState::new(2);
        for _ in 0..10_000 {
            let x = rng.centered_uniform();
            assert!((-0.5..0.5).contains(&x));
        }
    }
}
