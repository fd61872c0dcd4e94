//! Source distributions, quantized frequency models and the information
//! quantities used to reason about them.
//!
//! Symbols are identified by their index `0..len`; index order is the total
//! order used for cumulative offsets and every tie-break in this crate.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest supported model precision; counts are stored as `u32`.
pub const MAX_PRECISION_BITS: u32 = 32;

/// An i.i.d. source over a finite alphabet with exact rational probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDistribution {
    probs: Vec<BigRational>,
}

impl SourceDistribution {
    /// Normalizes positive weights exactly. Symbol order is input order.
    pub fn new(weights: &[BigRational]) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::EmptyAlphabet(weights.len()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::NonPositiveWeight(i));
        }
        let sum = weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w);
        let probs = weights.iter().map(|w| w / &sum).collect();
        Ok(Self { probs })
    }

    /// Convenience constructor from integer weights.
    pub fn from_weights(weights: &[u64]) -> Result<Self> {
        let w: Vec<BigRational> = weights
            .iter()
            .map(|&w| BigRational::from_integer(BigInt::from(w)))
            .collect();
        Self::new(&w)
    }

    /// The distribution `q(s) = N_s / N` of a quantized model.
    pub fn from_model(model: &QuantizedModel) -> Self {
        let total = BigInt::from(model.total());
        let probs = model
            .counts()
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), total.clone()))
            .collect();
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> &BigRational {
        &self.probs[symbol]
    }

    pub fn prob_f64(&self, symbol: usize) -> f64 {
        ratio_to_f64(&self.probs[symbol])
    }
}

/// Parses `"3"`, `"3/4"` or `"0.75"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidProbability(text.to_string());
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let magnitude = int.abs() * &scale + frac;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(num, scale));
    }
    let int: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(int))
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Integer frequencies `N_s >= 1` with cumulative offsets `d_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedModel {
    counts: Vec<u32>,
    cum: Vec<u64>,
    total: u64,
}

impl QuantizedModel {
    /// Builds a model from raw counts. The total need not be a power of two;
    /// codecs that require `N = 2^R` check [`precision_bits`](Self::precision_bits).
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::EmptyAlphabet(counts.len()));
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(Error::NonPositiveWeight(i));
        }
        let mut cum = Vec::with_capacity(counts.len());
        let mut total = 0u64;
        for &c in &counts {
            cum.push(total);
            total += u64::from(c);
        }
        Ok(Self { counts, cum, total })
    }

    /// Like [`from_counts`](Self::from_counts) but insists on `Σ N_s = 2^bits`.
    pub fn with_precision(counts: Vec<u32>, bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_PRECISION_BITS {
            return Err(Error::PrecisionOutOfRange(bits));
        }
        let model = Self::from_counts(counts)?;
        let expected = 1u64 << bits;
        if model.total != expected {
            return Err(Error::CountSumMismatch {
                sum: model.total,
                expected,
            });
        }
        Ok(model)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `R` when `N = 2^R`.
    pub fn precision_bits(&self) -> Option<u32> {
        self.total
            .is_power_of_two()
            .then(|| self.total.trailing_zeros())
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, symbol: usize) -> u32 {
        self.counts[symbol]
    }

    /// `d_s`, the sum of counts of all symbols ordered before `symbol`.
    pub fn cum(&self, symbol: usize) -> u64 {
        self.cum[symbol]
    }

    pub fn cums(&self) -> &[u64] {
        &self.cum
    }

    /// `q(s) = N_s / N`.
    pub fn q(&self, symbol: usize) -> f64 {
        f64::from(self.counts[symbol]) / self.total as f64
    }

    /// The smallest symbol `s` with `slot < d_s + N_s`. `slot` must be `< N`.
    pub fn symbol_for(&self, slot: u64) -> usize {
        debug_assert!(slot < self.total);
        self.cum.partition_point(|&c| c <= slot) - 1
    }
}

/// Largest-remainder apportionment of `dist` onto a total of `2^bits`,
/// with every count floored at one.
pub fn quantize(dist: &SourceDistribution, bits: u32) -> Result<QuantizedModel> {
    if bits == 0 || bits > MAX_PRECISION_BITS {
        return Err(Error::PrecisionOutOfRange(bits));
    }
    let n = dist.len();
    let total = 1u64 << bits;
    if (n as u64) > total {
        return Err(Error::AlphabetTooLarge { symbols: n, bits });
    }
    let total_q = BigRational::from_integer(BigInt::from(total));
    let targets: Vec<BigRational> = dist.probs().iter().map(|p| p * &total_q).collect();
    let mut counts: Vec<u64> = targets
        .iter()
        .map(|t| t.floor().to_integer().to_u64().unwrap_or(0).max(1))
        .collect();
    let assigned: u64 = counts.iter().sum();

    // The remaining error of a symbol is `target - count`.
    let residual = |s: usize, counts: &[u64]| &targets[s] - BigRational::from_integer(counts[s].into());

    if assigned < total {
        let mut heap: BinaryHeap<(BigRational, Reverse<usize>)> =
            (0..n).map(|s| (residual(s, &counts), Reverse(s))).collect();
        for _ in 0..total - assigned {
            let (_, Reverse(s)) = heap.pop().expect("non-empty alphabet");
            counts[s] += 1;
            heap.push((residual(s, &counts), Reverse(s)));
        }
    } else if assigned > total {
        let mut heap: BinaryHeap<(Reverse<BigRational>, Reverse<usize>)> = (0..n)
            .filter(|&s| counts[s] > 1)
            .map(|s| (Reverse(residual(s, &counts)), Reverse(s)))
            .collect();
        for _ in 0..assigned - total {
            // 2^bits >= n guarantees some count stays above one.
            let (_, Reverse(s)) = heap.pop().expect("reducible count");
            counts[s] -= 1;
            if counts[s] > 1 {
                heap.push((Reverse(residual(s, &counts)), Reverse(s)));
            }
        }
    }

    let counts = counts
        .into_iter()
        .map(|c| u32::try_from(c).map_err(|_| Error::PrecisionOutOfRange(bits)))
        .collect::<Result<Vec<_>>>()?;
    QuantizedModel::with_precision(counts, bits)
}

/// `H(p)` in bits.
pub fn entropy(dist: &SourceDistribution) -> f64 {
    dist.probs()
        .iter()
        .map(|p| {
            let p = ratio_to_f64(p);
            -p * p.log2()
        })
        .sum()
}

/// `D(p || q)` in bits with `q(s) = N_s / N`.
pub fn kl_divergence(p: &SourceDistribution, q: &QuantizedModel) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch(p.len(), q.len()));
    }
    let total = BigInt::from(q.total());
    let d: f64 = p
        .probs()
        .iter()
        .zip(q.counts())
        .map(|(ps, &ns)| {
            let ratio = ps * BigRational::new(total.clone(), BigInt::from(ns));
            ratio_to_f64(ps) * ratio_to_f64(&ratio).log2()
        })
        .sum();
    Ok(d.max(0.0))
}

/// `Σ p(s) lg(1/q(s)) = H(p) + D(p || q)`.
pub fn cross_entropy(p: &SourceDistribution, q: &QuantizedModel) -> Result<f64> {
    Ok(entropy(p) + kl_divergence(p, q)?)
}
