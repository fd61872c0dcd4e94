//! Streaming rANS with a fixed-width state.
//!
//! The state lives in `[2^(ra-rb), 2^ra)`. Before each encode step the
//! encoder pushes `rb`-bit words off the low end of `x` until the step is
//! guaranteed to land back inside the interval; the decoder pops them back
//! after each decode step. Words are kept on a LIFO stack.

use crate::error::{Error, Result};
use crate::model::QuantizedModel;

/// Largest supported `r_a`, leaving headroom in a `u64` state.
pub const MAX_STATE_BITS: u32 = 62;

/// `(R, r_a, r_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamParams {
    precision_bits: u32,
    state_bits: u32,
    word_bits: u32,
}

impl Default for StreamParams {
    /// `(R, r_a, r_b) = (12, 32, 16)`, so the state keeps `2^4` headroom
    /// above `N` after renormalization.
    fn default() -> Self {
        Self {
            precision_bits: 12,
            state_bits: 32,
            word_bits: 16,
        }
    }
}

impl StreamParams {
    pub fn new(precision_bits: u32, state_bits: u32, word_bits: u32) -> Result<Self> {
        if precision_bits == 0 || word_bits == 0 {
            return Err(Error::InvalidParams(
                "R and r_b must be positive".to_string(),
            ));
        }
        if state_bits > MAX_STATE_BITS {
            return Err(Error::InvalidParams(format!(
                "r_a = {state_bits} exceeds {MAX_STATE_BITS}"
            )));
        }
        if state_bits <= word_bits || state_bits - word_bits <= precision_bits {
            return Err(Error::InvalidParams(format!(
                "need r_a - r_b > R, got r_a = {state_bits}, r_b = {word_bits}, R = {precision_bits}"
            )));
        }
        Ok(Self {
            precision_bits,
            state_bits,
            word_bits,
        })
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn state_bits(&self) -> u32 {
        self.state_bits
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    /// `2^(r_a - r_b)`, the lower end of the state interval and `x_T`.
    pub fn lower(&self) -> u64 {
        1 << (self.state_bits - self.word_bits)
    }

    /// `2^r_a`, the exclusive upper end of the state interval.
    pub fn upper(&self) -> u64 {
        1 << self.state_bits
    }

    pub fn contains(&self, x: u64) -> bool {
        (self.lower()..self.upper()).contains(&x)
    }

    fn word_mask(&self) -> u64 {
        (1 << self.word_bits) - 1
    }

    fn max_pushes(&self) -> u32 {
        self.state_bits.div_ceil(self.word_bits)
    }

    fn check_model(&self, model: &QuantizedModel) -> Result<()> {
        match model.precision_bits() {
            Some(r) if r == self.precision_bits => Ok(()),
            _ => Err(Error::InvalidParams(format!(
                "model total {} is not 2^{}",
                model.total(),
                self.precision_bits
            ))),
        }
    }
}

/// LIFO stack of `r_b`-bit words; the last element is the top.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenormStack {
    words: Vec<u64>,
}

impl RenormStack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stack from words listed bottom first.
    pub fn from_bottom_up(words: Vec<u64>) -> Self {
        Self { words }
    }

    pub fn push(&mut self, word: u64) {
        self.words.push(word);
    }

    pub fn pop(&mut self) -> Option<u64> {
        self.words.pop()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words bottom first.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Words in pop order.
    pub fn top_first(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().rev().copied()
    }
}

/// Final state, renormalization stack and symbol count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamCodeword {
    pub x0: u64,
    pub stack: RenormStack,
    pub len: usize,
}

impl StreamCodeword {
    /// `lg x0 + r_b·|stack|`.
    pub fn bit_length(&self, params: &StreamParams) -> f64 {
        (self.x0 as f64).log2() + f64::from(params.word_bits) * self.stack.len() as f64
    }
}

/// Pushes low words of `x` until `x < N_s·2^(r_a - R)`.
pub fn push_renormalize(
    params: &StreamParams,
    count: u32,
    mut x: u64,
    stack: &mut RenormStack,
) -> u64 {
    debug_assert!(params.contains(x));
    let limit = u64::from(count) << (params.state_bits - params.precision_bits);
    let mut pushes = 0;
    while x >= limit {
        stack.push(x & params.word_mask());
        x >>= params.word_bits;
        pushes += 1;
    }
    debug_assert!(pushes <= params.max_pushes());
    debug_assert!(x >= u64::from(count) << (params.state_bits - params.word_bits - params.precision_bits));
    x
}

/// Pops words into `x` until `x >= 2^(r_a - r_b)`.
pub fn pop_renormalize(params: &StreamParams, mut x: u64, stack: &mut RenormStack) -> Result<u64> {
    while x < params.lower() {
        let word = stack.pop().ok_or(Error::StackUnderflow)?;
        x = (x << params.word_bits) | word;
    }
    Ok(x)
}

fn encode_step(model: &QuantizedModel, params: &StreamParams, symbol: usize, x: u64) -> u64 {
    let count = u64::from(model.count(symbol));
    ((x / count) << params.precision_bits) + model.cum(symbol) + x % count
}

fn decode_step(model: &QuantizedModel, params: &StreamParams, x: u64) -> (usize, u64) {
    let slot = x & ((1 << params.precision_bits) - 1);
    let symbol = model.symbol_for(slot);
    let next = u64::from(model.count(symbol)) * (x >> params.precision_bits) + slot - model.cum(symbol);
    (symbol, next)
}

pub fn encode(
    model: &QuantizedModel,
    params: &StreamParams,
    symbols: &[usize],
) -> Result<StreamCodeword> {
    params.check_model(model)?;
    let mut x = params.lower();
    let mut stack = RenormStack::new();
    for &s in symbols.iter().rev() {
        if s >= model.len() {
            return Err(Error::UnknownSymbol(s));
        }
        x = push_renormalize(params, model.count(s), x, &mut stack);
        x = encode_step(model, params, s, x);
        assert!(params.contains(x), "state {x} left the coding interval");
    }
    Ok(StreamCodeword {
        x0: x,
        stack,
        len: symbols.len(),
    })
}

pub fn decode(
    model: &QuantizedModel,
    params: &StreamParams,
    codeword: &StreamCodeword,
) -> Result<Vec<usize>> {
    params.check_model(model)?;
    let mut x = codeword.x0;
    if !params.contains(x) {
        return Err(Error::StateOutOfRange(x));
    }
    let mask = params.word_mask();
    if codeword.stack.words().iter().any(|&w| w & !mask != 0) {
        return Err(Error::MalformedPayload(format!(
            "stack word wider than {} bits",
            params.word_bits
        )));
    }
    let mut stack = codeword.stack.clone();
    let mut out = Vec::with_capacity(codeword.len.min(1 << 20));
    for _ in 0..codeword.len {
        let (s, next) = decode_step(model, params, x);
        out.push(s);
        x = pop_renormalize(params, next, &mut stack)?;
        debug_assert!(params.contains(x));
    }
    if x != params.lower() {
        return Err(Error::CorruptState);
    }
    if !stack.is_empty() {
        return Err(Error::TrailingStackWords(stack.len()));
    }
    Ok(out)
}
