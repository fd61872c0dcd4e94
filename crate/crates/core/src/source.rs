//! Deterministic pseudo-random sources.
//!
//! [`SplitMix64`] is a 64-bit multiply/xor-shift generator. Its output is
//! fixed by the algorithm alone, so a seed reproduces the same symbol stream
//! on every platform and release.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::model::SourceDistribution;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, bound)` by rejection; `bound` must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent sub-stream of `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Draws i.i.d. symbols from a [`SourceDistribution`].
///
/// Cumulative probabilities are truncated to 64-bit fixed point from the
/// exact rationals, so each symbol's sampling probability is within 2^-64
/// of `p(s)`.
#[derive(Debug, Clone)]
pub struct SymbolSampler {
    // upper[s] = floor(2^64 * Σ_{t<=s} p(t)), saturated; the last symbol
    // takes every draw above upper[len - 2].
    upper: Vec<u64>,
}

impl SymbolSampler {
    pub fn new(dist: &SourceDistribution) -> Self {
        let scale = BigRational::from_integer(BigInt::from(1u8) << 64);
        let mut acc = BigRational::zero();
        let mut upper = Vec::with_capacity(dist.len());
        for p in dist.probs() {
            acc += p;
            let v = (&acc * &scale).floor().to_integer();
            upper.push(v.to_u64().unwrap_or(u64::MAX));
        }
        Self { upper }
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> usize {
        let u = rng.next_u64();
        let last = self.upper.len() - 1;
        self.upper[..last].partition_point(|&c| c <= u)
    }

    pub fn sequence(&self, rng: &mut SplitMix64, len: usize) -> Vec<usize> {
        (0..len).map(|_| self.sample(rng)).collect()
    }
}
