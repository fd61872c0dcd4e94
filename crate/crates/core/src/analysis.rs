//! Closed-form code-length bounds, Monte-Carlo length measurement and the
//! tANS stationary state distribution.
//!
//! Lengths are in bits per symbol. Big-integer codewords are measured as the
//! real number `lg x0`, not their byte-aligned size.

use std::io::Write;

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::abs::{self, AbsParams};
use crate::container::CodecId;
use crate::error::{Error, Result};
use crate::model::{self, QuantizedModel, SourceDistribution};
use crate::rans;
use crate::source::{sub_seed, SplitMix64, SymbolSampler};
use crate::stream::{self, StreamParams};
use crate::tans::{self, TansTables};

/// `lg e`.
pub const LG_E: f64 = std::f64::consts::LOG2_E;

/// Steps used to estimate `E[X]` when measuring tANS lengths.
pub const TANS_STATIONARY_STEPS: usize = 1_000_000;

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn binary_entropy(p1: f64) -> f64 {
    let p0 = 1.0 - p1;
    -(p0 * p0.log2() + p1 * p1.log2())
}

/// `lg x` for an arbitrarily large positive integer.
pub fn lg_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).iter_u64_digits().next().unwrap_or(0);
    shift as f64 + (top as f64).log2()
}

/// `η = min{1/p0, 1/(2p1)}` for `0 < p1 < 1/2`.
pub fn abs_eta(p1: Ratio<u64>) -> Result<f64> {
    if *p1.numer() == 0 || p1 * 2 >= Ratio::from_integer(1) {
        return Err(Error::OutOfCase);
    }
    let p1 = ratio_f64(p1);
    Ok((1.0 / (1.0 - p1)).min(1.0 / (2.0 * p1)))
}

/// Per-sequence excess `(lg e)·η/(η-1)` of uABS over `Σ lg(1/p_s)`, by
/// symmetry also for `p1 > 1/2`.
pub fn abs_excess(p1: Ratio<u64>) -> Result<f64> {
    let one = Ratio::from_integer(1);
    let p = if p1 * 2 > one { one - p1 } else { p1 };
    let eta = abs_eta(p)?;
    Ok(LG_E * eta / (eta - 1.0))
}

/// `H(p) + (lg e / T)·η/(η-1)` for a source matching `p1 < 1/2`.
pub fn abs_bound(p1: Ratio<u64>, t: u64) -> Result<f64> {
    abs_eta(p1)?;
    Ok(binary_entropy(ratio_f64(p1)) + abs_excess(p1)? / t as f64)
}

/// `η = min_s N/N_s - N/A`.
pub fn rans_eta(model: &QuantizedModel, a: u64) -> f64 {
    let n = model.total() as f64;
    let max = f64::from(*model.counts().iter().max().expect("non-empty model"));
    n / max - n / a as f64
}

fn rans_eta_exceeds_one(model: &QuantizedModel, a: u64) -> bool {
    // N/M - N/A > 1  <=>  N·A > M·(A + N)
    let n = u128::from(model.total());
    let m = u128::from(*model.counts().iter().max().expect("non-empty model"));
    let a = u128::from(a);
    a > 0 && n * a > m * (a + n)
}

/// `H + D + (lg A + (N lg e / A)·η/(η-1)) / T` for `x_T = A`.
pub fn rans_bound(
    p: &SourceDistribution,
    model: &QuantizedModel,
    a: u64,
    t: u64,
) -> Result<f64> {
    let eta = rans_eta(model, a);
    if !rans_eta_exceeds_one(model, a) {
        return Err(Error::EtaNotGreaterThanOne(eta));
    }
    let n = model.total() as f64;
    let loss = (a as f64).log2() + n * LG_E / a as f64 * eta / (eta - 1.0);
    Ok(model::cross_entropy(p, model)? + loss / t as f64)
}

/// `H + D + lg e / 2^(r_a - r_b - R) + (r_a - r_b) / T`.
pub fn stream_bound(
    p: &SourceDistribution,
    model: &QuantizedModel,
    params: &StreamParams,
    t: u64,
) -> Result<f64> {
    if model.precision_bits() != Some(params.precision_bits()) {
        return Err(Error::InvalidParams(format!(
            "model total {} is not 2^{}",
            model.total(),
            params.precision_bits()
        )));
    }
    let gap = params.state_bits() - params.word_bits();
    let headroom = gap - params.precision_bits();
    Ok(model::cross_entropy(p, model)?
        + LG_E / 2f64.powi(headroom as i32)
        + f64::from(gap) / t as f64)
}

/// `H + D + lg(E[X] / N)` for a steady-state mean `E[X]` in `[N, 2N)`.
pub fn tans_bound(p: &SourceDistribution, model: &QuantizedModel, e_x: f64) -> Result<f64> {
    let n = model.total() as f64;
    if !(n..2.0 * n).contains(&e_x) {
        return Err(Error::EOutOfRange(e_x));
    }
    Ok(model::cross_entropy(p, model)? + (e_x / n).log2())
}

/// `H + D + 1`, valid for any spread.
pub fn tans_loose_bound(p: &SourceDistribution, model: &QuantizedModel) -> Result<f64> {
    Ok(model::cross_entropy(p, model)? + 1.0)
}

/// `Q*(x) = lg((x+1)/x)` for `x` in `[N, 2N)`.
pub fn ideal_stationary(n: u32) -> Vec<f64> {
    (n..2 * n)
        .map(|x| (1.0 + 1.0 / f64::from(x)).log2())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryReport {
    pub n: u32,
    /// Empirical `Q(x)`, indexed by `x - N`.
    pub q: Vec<f64>,
    pub q_star: Vec<f64>,
    pub tv: f64,
    pub e_x: f64,
    /// `E[Y | s]`; `None` for symbols never drawn after burn-in.
    pub e_y: Vec<Option<f64>>,
}

/// Runs the encoder state chain `x -> C(s, floor(x / 2^k))` with `s ~ p`
/// from `x = N`, discarding the first tenth of the steps.
pub fn stationary_distribution(
    tables: &TansTables,
    dist: &SourceDistribution,
    steps: usize,
    seed: u64,
) -> Result<StationaryReport> {
    if dist.len() != tables.alphabet_len() {
        return Err(Error::AlphabetMismatch(dist.len(), tables.alphabet_len()));
    }
    let n = tables.size();
    let sampler = SymbolSampler::new(dist);
    let mut rng = SplitMix64::new(seed);
    let burn_in = steps / 10;
    let mut visits = vec![0u64; n as usize];
    let mut y_sum = vec![0u64; dist.len()];
    let mut y_hits = vec![0u64; dist.len()];
    let mut x = n;
    for step in 0..steps {
        let s = sampler.sample(&mut rng);
        let y = x >> tables.nbits(s, x);
        if step >= burn_in {
            visits[(x - n) as usize] += 1;
            y_sum[s] += u64::from(y);
            y_hits[s] += 1;
        }
        x = tables.encode_state(s, y);
    }
    let kept = (steps - burn_in).max(1) as f64;
    let q: Vec<f64> = visits.iter().map(|&v| v as f64 / kept).collect();
    let q_star = ideal_stationary(n);
    let tv = 0.5 * q.iter().zip(&q_star).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let e_x = visits
        .iter()
        .enumerate()
        .map(|(i, &v)| (u64::from(n) + i as u64) as f64 * v as f64)
        .sum::<f64>()
        / kept;
    let e_y = y_sum
        .iter()
        .zip(&y_hits)
        .map(|(&sum, &hits)| (hits > 0).then(|| sum as f64 / hits as f64))
        .collect();
    Ok(StationaryReport {
        n,
        q,
        q_star,
        tv,
        e_x,
        e_y,
    })
}

/// A codec and its parameters, for measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecConfig {
    Uabs { p1: Ratio<u64> },
    /// `initial` is `x_T = A`.
    Rans { model: QuantizedModel, initial: u64 },
    Stream { model: QuantizedModel, params: StreamParams },
    Tans { model: QuantizedModel },
}

impl CodecConfig {
    pub fn codec(&self) -> CodecId {
        match self {
            Self::Uabs { .. } => CodecId::Uabs,
            Self::Rans { .. } => CodecId::Rans,
            Self::Stream { .. } => CodecId::RansStream,
            Self::Tans { .. } => CodecId::Tans,
        }
    }

    pub fn describe(&self) -> String {
        let counts = |m: &QuantizedModel| {
            m.counts()
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            Self::Uabs { p1 } => format!("p1={p1}"),
            Self::Rans { model, initial } => {
                format!("N={} counts={} A={initial}", model.total(), counts(model))
            }
            Self::Stream { model, params } => format!(
                "R={} ra={} rb={} counts={}",
                params.precision_bits(),
                params.state_bits(),
                params.word_bits(),
                counts(model)
            ),
            Self::Tans { model } => format!("N={} counts={}", model.total(), counts(model)),
        }
    }

    /// `lg(1/q(s))` per symbol.
    fn ideal_lengths(&self) -> Vec<f64> {
        match self {
            Self::Uabs { p1 } => {
                let p1 = ratio_f64(*p1);
                vec![-(1.0 - p1).log2(), -p1.log2()]
            }
            Self::Rans { model, .. } | Self::Stream { model, .. } | Self::Tans { model } => {
                (0..model.len()).map(|s| -model.q(s).log2()).collect()
            }
        }
    }

    fn alphabet_len(&self) -> usize {
        match self {
            Self::Uabs { .. } => 2,
            Self::Rans { model, .. } | Self::Stream { model, .. } | Self::Tans { model } => {
                model.len()
            }
        }
    }
}

/// Code length of one trial, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialLength {
    pub bits: f64,
    /// `Σ_t lg(1/q(s_t))` for the same sequence.
    pub ideal_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthReport {
    pub codec: CodecId,
    pub dist: String,
    pub params: String,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
    /// Mean over trials of `bits / T`.
    pub l_mean: f64,
    /// Sample standard deviation over trials of `bits / T`.
    pub l_std: f64,
    /// Control-variate estimate of `L`: mean of `(bits - ideal_bits) / T`
    /// plus its known expectation `H + D`.
    pub l_cv: f64,
    pub entropy: f64,
    pub divergence: f64,
    pub bound: Option<f64>,
    pub eta: Option<f64>,
    /// Steady-state `E[X]` used by the tANS bound.
    pub e_x: Option<f64>,
    pub note: String,
    pub per_trial: Vec<TrialLength>,
}

impl LengthReport {
    /// `bound - l_cv`.
    pub fn margin(&self) -> Option<f64> {
        self.bound.map(|b| b - self.l_cv)
    }

    /// Largest `(bits - ideal_bits)` over trials.
    pub fn max_excess_bits(&self) -> f64 {
        self.per_trial
            .iter()
            .map(|t| t.bits - t.ideal_bits)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn divergence_for(dist: &SourceDistribution, config: &CodecConfig) -> Result<f64> {
    match config {
        CodecConfig::Uabs { .. } => {
            let ideal = config.ideal_lengths();
            let d: f64 = (0..2)
                .map(|s| {
                    let p = dist.prob_f64(s);
                    p * (ideal[s] + p.log2())
                })
                .sum();
            Ok(d.max(0.0))
        }
        CodecConfig::Rans { model, .. }
        | CodecConfig::Stream { model, .. }
        | CodecConfig::Tans { model } => model::kl_divergence(dist, model),
    }
}

fn measure_trial(
    config: &CodecConfig,
    tables: Option<&TansTables>,
    symbols: &[usize],
) -> Result<f64> {
    Ok(match config {
        CodecConfig::Uabs { p1 } => {
            let params = AbsParams::new(*p1.numer(), *p1.denom())?;
            let bits: Vec<bool> = symbols.iter().map(|&s| s == 1).collect();
            lg_big(&abs::encode(&params, &bits))
        }
        CodecConfig::Rans { model, initial } => {
            lg_big(&rans::encode(model, symbols, &BigUint::from(*initial))?)
        }
        CodecConfig::Stream { model, params } => {
            stream::encode(model, params, symbols)?.bit_length(params)
        }
        CodecConfig::Tans { .. } => {
            let tables = tables.expect("tables built for tANS");
            tans::encode(tables, symbols)?.total_bits(tables) as f64
        }
    })
}

/// Encodes `trials` i.i.d. sequences of length `t` drawn from `dist` and
/// compares the average code length with the matching bound.
///
/// Trial `i` draws its sequence from `sub_seed(seed, i)`. A bound whose
/// preconditions fail leaves `bound` empty and records the reason in `note`.
pub fn measure_average_length(
    config: &CodecConfig,
    dist: &SourceDistribution,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<LengthReport> {
    if trials == 0 || t == 0 {
        return Err(Error::InvalidParams("T and trials must be positive".to_string()));
    }
    if dist.len() != config.alphabet_len() {
        return Err(Error::AlphabetMismatch(dist.len(), config.alphabet_len()));
    }
    let tables = match config {
        CodecConfig::Tans { model } => Some(TansTables::build(model)?),
        _ => None,
    };
    let ideal = config.ideal_lengths();
    let sampler = SymbolSampler::new(dist);
    let mut per_trial = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut rng = SplitMix64::new(sub_seed(seed, i as u64));
        let symbols = sampler.sequence(&mut rng, t);
        let bits = measure_trial(config, tables.as_ref(), &symbols)?;
        let ideal_bits = symbols.iter().map(|&s| ideal[s]).sum();
        per_trial.push(TrialLength { bits, ideal_bits });
    }

    let tf = t as f64;
    let per_symbol: Vec<f64> = per_trial.iter().map(|r| r.bits / tf).collect();
    let l_mean = per_symbol.iter().sum::<f64>() / trials as f64;
    let l_std = if trials > 1 {
        (per_symbol.iter().map(|l| (l - l_mean).powi(2)).sum::<f64>() / (trials - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    let entropy = model::entropy(dist);
    let divergence = divergence_for(dist, config)?;
    let excess = per_trial
        .iter()
        .map(|r| (r.bits - r.ideal_bits) / tf)
        .sum::<f64>()
        / trials as f64;
    let l_cv = entropy + divergence + excess;

    let mut e_x = None;
    let bounded: Result<(f64, Option<f64>)> = match config {
        CodecConfig::Uabs { p1 } => abs_excess(*p1).map(|ex| {
            let one = Ratio::from_integer(1);
            let p = if *p1 * 2 > one { one - *p1 } else { *p1 };
            (entropy + divergence + ex / tf, abs_eta(p).ok())
        }),
        CodecConfig::Rans { model, initial } => rans_bound(dist, model, *initial, t as u64)
            .map(|b| (b, Some(rans_eta(model, *initial)))),
        CodecConfig::Stream { model, params } => {
            stream_bound(dist, model, params, t as u64).map(|b| (b, None))
        }
        CodecConfig::Tans { model } => {
            let tables = tables.as_ref().expect("tables built for tANS");
            let report = stationary_distribution(
                tables,
                dist,
                TANS_STATIONARY_STEPS,
                sub_seed(seed, trials as u64),
            )?;
            e_x = Some(report.e_x);
            // The R bits of x0 are outside the steady-state bound.
            tans_bound(dist, model, report.e_x)
                .map(|b| (b + f64::from(tables.precision_bits()) / tf, None))
        }
    };
    let (bound, eta, note) = match bounded {
        Ok((b, eta)) => (Some(b), eta, String::new()),
        Err(e @ (Error::OutOfCase | Error::EtaNotGreaterThanOne(_) | Error::EOutOfRange(_))) => {
            let eta = match (config, &e) {
                (_, Error::EtaNotGreaterThanOne(eta)) => Some(*eta),
                _ => None,
            };
            (None, eta, format!("bound skipped: {e}"))
        }
        Err(e) => return Err(e),
    };

    Ok(LengthReport {
        codec: config.codec(),
        dist: describe_dist(dist),
        params: config.describe(),
        t,
        trials,
        seed,
        l_mean,
        l_std,
        l_cv,
        entropy,
        divergence,
        bound,
        eta,
        e_x,
        note,
        per_trial,
    })
}

fn describe_dist(dist: &SourceDistribution) -> String {
    dist.probs()
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchCell {
    pub config: CodecConfig,
    pub dist: SourceDistribution,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
}

impl BenchCell {
    pub fn run(&self) -> Result<LengthReport> {
        measure_average_length(&self.config, &self.dist, self.t, self.trials, self.seed)
    }
}

/// Thirteen cells covering every codec at desk scale.
pub fn default_suite(seed: u64, trials: usize) -> Result<Vec<BenchCell>> {
    let skewed = SourceDistribution::from_weights(&[7, 3])?;
    let quarter = SourceDistribution::from_weights(&[3, 1])?;
    let four = SourceDistribution::from_weights(&[10, 5, 3, 2])?;
    let mut cells = Vec::new();
    let mut push = |config, dist: &SourceDistribution, t| {
        let index = cells.len() as u64;
        cells.push(BenchCell {
            config,
            dist: dist.clone(),
            t,
            trials,
            seed: sub_seed(seed, index),
        });
    };

    for (num, den) in [(1, 10), (1, 4), (2, 5), (3, 4)] {
        let p1 = Ratio::new(num, den);
        let dist = SourceDistribution::from_weights(&[den - num, num])?;
        push(CodecConfig::Uabs { p1 }, &dist, 10_000);
    }
    for (dist, bits) in [(&quarter, 2), (&skewed, 8), (&four, 10)] {
        let model = model::quantize(dist, bits)?;
        let initial = 16 * model.total();
        push(CodecConfig::Rans { model, initial }, dist, 10_000);
    }
    for dist in [&skewed, &four] {
        let model = model::quantize(dist, 12)?;
        push(
            CodecConfig::Stream {
                model,
                params: StreamParams::default(),
            },
            dist,
            100_000,
        );
    }
    for (dist, bits) in [(&four, 4), (&four, 8), (&four, 12), (&skewed, 8)] {
        let model = model::quantize(dist, bits)?;
        push(CodecConfig::Tans { model }, dist, 10_000);
    }
    Ok(cells)
}

pub const CSV_HEADER: [&str; 15] = [
    "codec", "dist", "params", "T", "seed", "trials", "L_mean", "L_std", "L_cv", "H", "D",
    "bound", "eta", "margin", "note",
];

/// Writes one CSV row per report, in order.
pub fn write_csv<W: Write>(reports: &[LengthReport], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.9}")).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.codec.name().to_string(),
            r.dist.clone(),
            r.params.clone(),
            r.t.to_string(),
            r.seed.to_string(),
            r.trials.to_string(),
            format!("{:.9}", r.l_mean),
            format!("{:.9}", r.l_std),
            format!("{:.9}", r.l_cv),
            format!("{:.9}", r.entropy),
            format!("{:.9}", r.divergence),
            opt(r.bound),
            opt(r.eta),
            opt(r.margin()),
            r.note.clone(),
        ])?;
    }
    w.flush()
}
