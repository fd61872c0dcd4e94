//! Tabled ANS.
//!
//! States live in `X = [N, 2N)` with `N = 2^R`. A spread assigns every pair
//! `(s, y)` with `y` in `Y_s = [N_s, 2N_s)` to a distinct state; encoding a
//! symbol emits the low `k` bits of the state so the remainder lands in
//! `Y_s`, then jumps through the spread. Decoding inverts the spread and
//! reads the same `k` bits back.

use std::cmp::Ordering;

use crate::container::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::model::QuantizedModel;

/// Largest supported table precision.
pub const MAX_TABLE_BITS: u32 = 20;

/// Orders all `(symbol, y)` pairs; the i-th pair becomes state `N + i`.
pub trait Spread {
    fn assign(&self, model: &QuantizedModel) -> Vec<(usize, u32)>;
}

/// Sorts pairs by the midpoint key `(2y + 1) / (2 N_s)`, ties by symbol
/// then by `y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MidpointSpread;

impl Spread for MidpointSpread {
    fn assign(&self, model: &QuantizedModel) -> Vec<(usize, u32)> {
        let mut pairs: Vec<(usize, u32)> = model
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(s, &n)| (n..2 * n).map(move |y| (s, y)))
            .collect();
        pairs.sort_by(|&(s1, y1), &(s2, y2)| {
            let lhs = (2 * u64::from(y1) + 1) * u64::from(model.count(s2));
            let rhs = (2 * u64::from(y2) + 1) * u64::from(model.count(s1));
            lhs.cmp(&rhs).then(s1.cmp(&s2)).then(y1.cmp(&y2))
        });
        pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeEntry {
    pub symbol: usize,
    pub y: u32,
    /// `R - floor(lg y)`.
    pub nbits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SymbolBits {
    /// `R - floor(lg N_s)`; emitted when `x >= threshold`.
    max_bits: u32,
    threshold: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TansTables {
    precision_bits: u32,
    counts: Vec<u32>,
    offsets: Vec<u32>,
    // encode[offsets[s] + y - N_s] = C(s, y)
    encode: Vec<u32>,
    // decode[x - N] = D(x)
    decode: Vec<DecodeEntry>,
    bits: Vec<SymbolBits>,
}

fn floor_lg(v: u32) -> u32 {
    31 - v.leading_zeros()
}

impl TansTables {
    /// Tables for the default [`MidpointSpread`].
    pub fn build(model: &QuantizedModel) -> Result<Self> {
        Self::with_spread(model, &MidpointSpread)
    }

    pub fn with_spread(model: &QuantizedModel, spread: &dyn Spread) -> Result<Self> {
        let precision_bits = match model.precision_bits() {
            Some(r) if (1..=MAX_TABLE_BITS).contains(&r) => r,
            _ => {
                return Err(Error::InvalidModel(format!(
                    "tANS needs N = 2^R with 1 <= R <= {MAX_TABLE_BITS}, got N = {}",
                    model.total()
                )))
            }
        };
        let n = 1u32 << precision_bits;
        let counts = model.counts().to_vec();
        let offsets: Vec<u32> = model.cums().iter().map(|&c| c as u32).collect();

        let order = spread.assign(model);
        if order.len() != n as usize {
            return Err(Error::InvalidModel(format!(
                "spread assigned {} states, expected {n}",
                order.len()
            )));
        }
        const UNSET: u32 = u32::MAX;
        let mut encode = vec![UNSET; n as usize];
        let mut decode = Vec::with_capacity(n as usize);
        for (i, &(s, y)) in order.iter().enumerate() {
            let count = *counts
                .get(s)
                .ok_or_else(|| Error::InvalidModel(format!("spread used symbol {s}")))?;
            if !(count..2 * count).contains(&y) {
                return Err(Error::InvalidModel(format!("spread used y = {y} for symbol {s}")));
            }
            let slot = &mut encode[(offsets[s] + y - count) as usize];
            if *slot != UNSET {
                return Err(Error::InvalidModel(format!("spread repeated ({s}, {y})")));
            }
            *slot = n + i as u32;
            decode.push(DecodeEntry {
                symbol: s,
                y,
                nbits: precision_bits - floor_lg(y),
            });
        }
        let bits = counts
            .iter()
            .map(|&c| {
                let max_bits = precision_bits - floor_lg(c);
                SymbolBits {
                    max_bits,
                    threshold: c << max_bits,
                }
            })
            .collect();
        Ok(Self {
            precision_bits,
            counts,
            offsets,
            encode,
            decode,
            bits,
        })
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// `N`.
    pub fn size(&self) -> u32 {
        1 << self.precision_bits
    }

    pub fn alphabet_len(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, symbol: usize) -> u32 {
        self.counts[symbol]
    }

    pub fn contains_state(&self, x: u32) -> bool {
        (self.size()..2 * self.size()).contains(&x)
    }

    /// `C(s, y)`; `y` must lie in `[N_s, 2N_s)`.
    pub fn encode_state(&self, symbol: usize, y: u32) -> u32 {
        self.encode[(self.offsets[symbol] + y - self.counts[symbol]) as usize]
    }

    /// `D(x)`; `x` must lie in `[N, 2N)`.
    pub fn decode_entry(&self, x: u32) -> DecodeEntry {
        self.decode[(x - self.size()) as usize]
    }

    /// `floor(lg(x / N_s))` from the per-symbol threshold.
    pub fn nbits(&self, symbol: usize, x: u32) -> u32 {
        let b = self.bits[symbol];
        if x >= b.threshold {
            b.max_bits
        } else {
            b.max_bits - 1
        }
    }

    /// The states `X_s` of one symbol, in increasing order.
    pub fn states_of(&self, symbol: usize) -> Vec<u32> {
        let mut xs: Vec<u32> = (self.counts[symbol]..2 * self.counts[symbol])
            .map(|y| self.encode_state(symbol, y))
            .collect();
        xs.sort_unstable();
        xs
    }
}

/// One encoder transition: `k` low bits of the old state and the new state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeStep {
    pub bits: u32,
    pub nbits: u32,
    pub y: u32,
    pub next: u32,
}

pub fn encode_step(tables: &TansTables, symbol: usize, x: u32) -> Result<EncodeStep> {
    if symbol >= tables.alphabet_len() {
        return Err(Error::UnknownSymbol(symbol));
    }
    if !tables.contains_state(x) {
        return Err(Error::StateOutOfRange(u64::from(x)));
    }
    let k = tables.nbits(symbol, x);
    let y = x >> k;
    debug_assert!((tables.count(symbol)..2 * tables.count(symbol)).contains(&y));
    Ok(EncodeStep {
        bits: x & ((1 << k) - 1),
        nbits: k,
        y,
        next: tables.encode_state(symbol, y),
    })
}

pub fn decode_step(tables: &TansTables, x: u32, reader: &mut BitReader<'_>) -> Result<(usize, u32)> {
    if !tables.contains_state(x) {
        return Err(Error::StateOutOfRange(u64::from(x)));
    }
    let entry = tables.decode_entry(x);
    let b = reader
        .read_bits(entry.nbits)
        .map_err(|_| Error::BitstreamExhausted)? as u32;
    let next = (entry.y << entry.nbits) | b;
    debug_assert!(tables.contains_state(next));
    Ok((entry.symbol, next))
}

/// Initial decoder state, packed bit body and symbol count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TansBitstream {
    pub x0: u32,
    pub bits: Vec<u8>,
    pub bit_len: u64,
    pub len: usize,
}

impl TansBitstream {
    /// `R + Σ k_t`.
    pub fn total_bits(&self, tables: &TansTables) -> u64 {
        u64::from(tables.precision_bits()) + self.bit_len
    }
}

/// Encodes from `x_T = N`, emitting `b_1 b_2 … b_T` in decode order.
pub fn encode(tables: &TansTables, symbols: &[usize]) -> Result<TansBitstream> {
    let mut x = tables.size();
    let mut words = Vec::with_capacity(symbols.len());
    for &s in symbols.iter().rev() {
        let step = encode_step(tables, s, x)?;
        words.push((step.bits, step.nbits));
        x = step.next;
    }
    let mut writer = BitWriter::new();
    for &(bits, k) in words.iter().rev() {
        writer.write_bits(u64::from(bits), k);
    }
    let bit_len = writer.bit_len();
    Ok(TansBitstream {
        x0: x,
        bits: writer.finish(),
        bit_len,
        len: symbols.len(),
    })
}

/// Decodes `len` symbols from `x0`, leaving unread bits in `reader`.
pub fn decode_from_reader(
    tables: &TansTables,
    x0: u32,
    reader: &mut BitReader<'_>,
    len: usize,
) -> Result<Vec<usize>> {
    let mut x = x0;
    let mut out = Vec::with_capacity(len.min(1 << 20));
    for _ in 0..len {
        let (s, next) = decode_step(tables, x, reader)?;
        out.push(s);
        x = next;
    }
    match x.cmp(&tables.size()) {
        Ordering::Equal => Ok(out),
        _ => Err(Error::CorruptState),
    }
}

pub fn decode(tables: &TansTables, stream: &TansBitstream) -> Result<Vec<usize>> {
    let mut reader = BitReader::with_limit(&stream.bits, stream.bit_len);
    let out = decode_from_reader(tables, stream.x0, &mut reader, stream.len)?;
    if reader.remaining() > 0 {
        return Err(Error::TrailingBits(reader.remaining()));
    }
    Ok(out)
}
