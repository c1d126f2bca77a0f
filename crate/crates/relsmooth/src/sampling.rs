//! Random coordinate-subset laws with equal marginal inclusion probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seedable deterministic generator with independent streams per replicate.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A coordinate-subset sampling law over `{0, .., n-1}`.
///
/// Every draw contains exactly `tau` distinct coordinates and every coordinate
/// has the same marginal inclusion probability `p0 = tau / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    n: usize,
    tau: usize,
}

impl Sampling {
    /// Uniform law over all subsets of size `tau` (tau-nice sampling).
    pub fn tau_nice(n: usize, tau: usize) -> Result<Self> {
        if n == 0 || tau == 0 || tau > n {
            return Err(Error::InvalidParams(format!(
                "tau-nice sampling needs 1 <= tau <= n, got tau = {tau}, n = {n}"
            )));
        }
        Ok(Self { n, tau })
    }

    /// Single uniformly random coordinate per draw (`tau = 1`).
    pub fn single_uniform(n: usize) -> Result<Self> {
        Self::tau_nice(n, 1)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Marginal inclusion probability, identical for every coordinate.
    pub fn p0(&self) -> f64 {
        self.tau as f64 / self.n as f64
    }

    /// Constant vector with entries `tau / n`.
    pub fn probability_vector(&self) -> Vec<f64> {
        vec![self.p0(); self.n]
    }

    /// Draws `tau` distinct coordinates, exactly uniform over size-`tau`
    /// subsets via a partial Fisher-Yates shuffle.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        if self.tau == self.n {
            return (0..self.n).collect();
        }
        let mut indices: Vec<usize> = (0..self.n).collect();
        for i in 0..self.tau {
            let j = rng.random_range(i..self.n);
            indices.swap(i, j);
        }
        indices.truncate(self.tau);
        indices
    }
}
