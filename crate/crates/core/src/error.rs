use thiserror::Error;

/// Errors produced by models, codecs, analysis routines and the container format.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet needs at least 2 symbols, got {0}")]
    EmptyAlphabet(usize),
    #[error("weight of symbol {0} is not positive")]
    NonPositiveWeight(usize),
    #[error("alphabet of {symbols} symbols does not fit a total of 2^{bits}")]
    AlphabetTooLarge { symbols: usize, bits: u32 },
    #[error("precision of {0} bits is outside the supported range")]
    PrecisionOutOfRange(u32),
    #[error("distribution and model have different alphabets ({0} vs {1} symbols)")]
    AlphabetMismatch(usize, usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid probability: {0}")]
    InvalidProbability(String),
    #[error("symbol {0} is not in the alphabet")]
    UnknownSymbol(usize),
    #[error("state {0} is outside the coding interval")]
    StateOutOfRange(u64),
    #[error("decoder finished in an unexpected state")]
    CorruptState,
    #[error("renormalization stack ran out of words")]
    StackUnderflow,
    #[error("{0} words left on the stack after decoding")]
    TrailingStackWords(usize),
    #[error("bitstream exhausted")]
    BitstreamExhausted,
    #[error("{0} unread bits after decoding")]
    TrailingBits(u64),
    #[error("read of {requested} bits with only {available} left")]
    OutOfBits { requested: u32, available: u64 },
    #[error("invalid stream parameters: {0}")]
    InvalidParams(String),
    #[error("bound requires 0 < p1 < 1/2")]
    OutOfCase,
    #[error("eta = {0} is not greater than one")]
    EtaNotGreaterThanOne(f64),
    #[error("mean state {0} is outside [N, 2N)")]
    EOutOfRange(f64),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unknown codec id {0}")]
    UnknownCodec(u8),
    #[error("payload truncated")]
    TruncatedPayload,
    #[error("frequency counts sum to {sum}, expected {expected}")]
    CountSumMismatch { sum: u64, expected: u64 },
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("symbol count {count} exceeds the decoder limit {limit}")]
    SymbolLimitExceeded { count: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
