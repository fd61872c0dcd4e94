//! Byte-exact codeword container.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "ANS1"
//! 4       1           codec: 0 = uABS, 1 = rANS, 2 = streaming rANS, 3 = tANS
//! 5       1           R (0 for uABS)
//! 6       2           alphabet size, little-endian (2 for uABS)
//! 8       4·size      N_s as u32 little-endian in symbol order (absent for uABS)
//! ..      8           T, u64 little-endian
//! ..      ..          codec payload
//! ```
//!
//! Payloads:
//!
//! * uABS: `p1` numerator and denominator (u64 LE each, lowest terms), then
//!   `x0` as a u32 LE byte length followed by its big-endian magnitude.
//! * rANS: `x0` as above. The encoder starts from `x_T = 1`.
//! * streaming rANS: `r_a` (u8), `r_b` (u8), `x0` (u64 LE), stack word count
//!   (u32 LE), then the words top first, each in `ceil(r_b/8)` big-endian bytes.
//! * tANS: `x0 - N` in `R` bits, then the bit body, MSB first, zero-padded to
//!   a byte boundary.
//!
//! Multi-byte magnitudes must be minimal (no leading zero byte) so that
//! parsing and re-serializing is the identity.

pub mod bits;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::abs::{self, AbsParams};
use crate::error::{Error, Result};
use crate::model::QuantizedModel;
use crate::rans;
use crate::stream::{self, RenormStack, StreamCodeword, StreamParams};
use crate::tans::{self, TansBitstream, TansTables};
use bits::{BitReader, BitWriter, MAX_BITS_PER_CALL};

pub const MAGIC: [u8; 4] = *b"ANS1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CodecId {
    Uabs = 0,
    Rans = 1,
    RansStream = 2,
    Tans = 3,
}

impl CodecId {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Self::Uabs),
            1 => Ok(Self::Rans),
            2 => Ok(Self::RansStream),
            3 => Ok(Self::Tans),
            other => Err(Error::UnknownCodec(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Uabs => "uabs",
            Self::Rans => "rans",
            Self::RansStream => "rans-stream",
            Self::Tans => "tans",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerHeader {
    pub codec: CodecId,
    pub precision_bits: u8,
    /// Empty for uABS, whose alphabet is always `{0, 1}`.
    pub counts: Vec<u32>,
    pub symbol_count: u64,
}

impl ContainerHeader {
    pub fn for_model(codec: CodecId, model: &QuantizedModel, symbol_count: u64) -> Result<Self> {
        let bits = model.precision_bits().ok_or_else(|| {
            Error::InvalidModel(format!("container needs N = 2^R, got {}", model.total()))
        })?;
        if codec == CodecId::Uabs || model.len() > usize::from(u16::MAX) {
            return Err(Error::InvalidModel("model does not fit the header".to_string()));
        }
        Ok(Self {
            codec,
            precision_bits: bits as u8,
            counts: model.counts().to_vec(),
            symbol_count,
        })
    }

    pub fn uabs(symbol_count: u64) -> Self {
        Self {
            codec: CodecId::Uabs,
            precision_bits: 0,
            counts: Vec::new(),
            symbol_count,
        }
    }

    pub fn alphabet_size(&self) -> u16 {
        match self.codec {
            CodecId::Uabs => 2,
            _ => self.counts.len() as u16,
        }
    }

    pub fn model(&self) -> Result<QuantizedModel> {
        QuantizedModel::with_precision(self.counts.clone(), u32::from(self.precision_bits))
    }
}

pub fn write_container(header: &ContainerHeader, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * header.counts.len() + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(header.codec as u8);
    out.push(header.precision_bits);
    out.extend_from_slice(&header.alphabet_size().to_le_bytes());
    for c in &header.counts {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&header.symbol_count.to_le_bytes());
    out.extend_from_slice(payload);
    out
}

/// Little-endian field reader over a byte slice.
struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::TruncatedPayload);
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn magnitude(&mut self) -> Result<BigUint> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        if bytes.first().is_none_or(|&b| b == 0) {
            return Err(Error::MalformedPayload("non-minimal magnitude".to_string()));
        }
        Ok(BigUint::from_bytes_be(bytes))
    }

    fn finish(&self) -> Result<()> {
        if self.bytes.is_empty() {
            Ok(())
        } else {
            Err(Error::MalformedPayload(format!(
                "{} trailing bytes",
                self.bytes.len()
            )))
        }
    }
}

pub fn read_container(bytes: &[u8]) -> Result<(ContainerHeader, &[u8])> {
    let mut cur = Cursor { bytes };
    if cur.take(4).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let codec = CodecId::from_byte(cur.u8()?)?;
    let precision_bits = cur.u8()?;
    let alphabet = cur.u16()?;
    let counts = if codec == CodecId::Uabs {
        if precision_bits != 0 || alphabet != 2 {
            return Err(Error::MalformedPayload(
                "uABS header must have R = 0 and two symbols".to_string(),
            ));
        }
        Vec::new()
    } else {
        if alphabet < 2 {
            return Err(Error::EmptyAlphabet(alphabet.into()));
        }
        if precision_bits == 0 || u32::from(precision_bits) > crate::model::MAX_PRECISION_BITS {
            return Err(Error::PrecisionOutOfRange(precision_bits.into()));
        }
        let counts = (0..alphabet)
            .map(|_| cur.u32())
            .collect::<Result<Vec<_>>>()?;
        let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        let expected = 1u64 << precision_bits;
        if sum != expected {
            return Err(Error::CountSumMismatch { sum, expected });
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(Error::NonPositiveWeight(i));
        }
        counts
    };
    let symbol_count = cur.u64()?;
    Ok((
        ContainerHeader {
            codec,
            precision_bits,
            counts,
            symbol_count,
        },
        cur.bytes,
    ))
}

/// Limits applied while parsing untrusted containers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeLimits {
    pub max_symbols: u64,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        Self {
            max_symbols: 1 << 32,
        }
    }
}

/// A parsed or freshly encoded codeword together with its model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Encoded {
    /// Always paired with the variant [`AbsParams::new`] selects for `p1`.
    Uabs {
        params: AbsParams,
        x0: BigUint,
        len: usize,
    },
    Rans {
        model: QuantizedModel,
        x0: BigUint,
        len: usize,
    },
    Stream {
        model: QuantizedModel,
        params: StreamParams,
        codeword: StreamCodeword,
    },
    Tans {
        model: QuantizedModel,
        stream: TansBitstream,
    },
}

impl Encoded {
    pub fn encode_uabs(params: AbsParams, bits: &[bool]) -> Self {
        Self::Uabs {
            params,
            x0: abs::encode(&params, bits),
            len: bits.len(),
        }
    }

    pub fn encode_rans(model: &QuantizedModel, symbols: &[usize]) -> Result<Self> {
        Ok(Self::Rans {
            model: model.clone(),
            x0: rans::encode_from_one(model, symbols)?,
            len: symbols.len(),
        })
    }

    pub fn encode_stream(
        model: &QuantizedModel,
        params: StreamParams,
        symbols: &[usize],
    ) -> Result<Self> {
        Ok(Self::Stream {
            model: model.clone(),
            params,
            codeword: stream::encode(model, &params, symbols)?,
        })
    }

    pub fn encode_tans(model: &QuantizedModel, symbols: &[usize]) -> Result<Self> {
        let tables = TansTables::build(model)?;
        Ok(Self::Tans {
            model: model.clone(),
            stream: tans::encode(&tables, symbols)?,
        })
    }

    pub fn codec(&self) -> CodecId {
        match self {
            Self::Uabs { .. } => CodecId::Uabs,
            Self::Rans { .. } => CodecId::Rans,
            Self::Stream { .. } => CodecId::RansStream,
            Self::Tans { .. } => CodecId::Tans,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Uabs { len, .. } | Self::Rans { len, .. } => *len,
            Self::Stream { codeword, .. } => codeword.len,
            Self::Tans { stream, .. } => stream.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn header(&self) -> Result<ContainerHeader> {
        let len = self.len() as u64;
        match self {
            Self::Uabs { .. } => Ok(ContainerHeader::uabs(len)),
            Self::Rans { model, .. } | Self::Stream { model, .. } | Self::Tans { model, .. } => {
                ContainerHeader::for_model(self.codec(), model, len)
            }
        }
    }

    pub fn payload(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Self::Uabs { params, x0, .. } => {
                out.extend_from_slice(&params.p1().numer().to_le_bytes());
                out.extend_from_slice(&params.p1().denom().to_le_bytes());
                put_magnitude(&mut out, x0);
            }
            Self::Rans { x0, .. } => put_magnitude(&mut out, x0),
            Self::Stream {
                params, codeword, ..
            } => {
                out.push(params.state_bits() as u8);
                out.push(params.word_bits() as u8);
                out.extend_from_slice(&codeword.x0.to_le_bytes());
                out.extend_from_slice(&(codeword.stack.len() as u32).to_le_bytes());
                let width = params.word_bits().div_ceil(8) as usize;
                for word in codeword.stack.top_first() {
                    out.extend_from_slice(&word.to_be_bytes()[8 - width..]);
                }
            }
            Self::Tans { model, stream } => {
                let n = model.total() as u32;
                let r = model.precision_bits().expect("tANS model has N = 2^R");
                let mut w = BitWriter::new();
                w.write_bits(u64::from(stream.x0 - n), r);
                let mut body = BitReader::with_limit(&stream.bits, stream.bit_len);
                while body.remaining() > 0 {
                    let k = body.remaining().min(u64::from(MAX_BITS_PER_CALL)) as u32;
                    w.write_bits(body.read_bits(k).expect("within limit"), k);
                }
                out = w.finish();
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        Ok(write_container(&self.header()?, &self.payload()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_bytes_with_limits(bytes, DecodeLimits::default())
    }

    pub fn from_bytes_with_limits(bytes: &[u8], limits: DecodeLimits) -> Result<Self> {
        let (header, payload) = read_container(bytes)?;
        if header.symbol_count > limits.max_symbols {
            return Err(Error::SymbolLimitExceeded {
                count: header.symbol_count,
                limit: limits.max_symbols,
            });
        }
        let len = usize::try_from(header.symbol_count).map_err(|_| Error::SymbolLimitExceeded {
            count: header.symbol_count,
            limit: usize::MAX as u64,
        })?;
        let mut cur = Cursor { bytes: payload };
        let encoded = match header.codec {
            CodecId::Uabs => {
                let (num, den) = (cur.u64()?, cur.u64()?);
                let params = AbsParams::new(num, den)?;
                if *params.p1().numer() != num {
                    return Err(Error::MalformedPayload("p1 not in lowest terms".to_string()));
                }
                let x0 = cur.magnitude()?;
                cur.finish()?;
                Self::Uabs { params, x0, len }
            }
            CodecId::Rans => {
                let x0 = cur.magnitude()?;
                cur.finish()?;
                Self::Rans {
                    model: header.model()?,
                    x0,
                    len,
                }
            }
            CodecId::RansStream => {
                let (ra, rb) = (cur.u8()?, cur.u8()?);
                let params = StreamParams::new(header.precision_bits.into(), ra.into(), rb.into())?;
                let x0 = cur.u64()?;
                let count = cur.u32()? as usize;
                let width = params.word_bits().div_ceil(8) as usize;
                if cur.bytes.len() / width < count {
                    return Err(Error::TruncatedPayload);
                }
                let mut words = Vec::with_capacity(count);
                for _ in 0..count {
                    let word = cur
                        .take(width)?
                        .iter()
                        .fold(0u64, |acc, &b| (acc << 8) | u64::from(b));
                    if word >> params.word_bits() != 0 {
                        return Err(Error::MalformedPayload("stack word too wide".to_string()));
                    }
                    words.push(word);
                }
                cur.finish()?;
                words.reverse();
                Self::Stream {
                    model: header.model()?,
                    params,
                    codeword: StreamCodeword {
                        x0,
                        stack: RenormStack::from_bottom_up(words),
                        len,
                    },
                }
            }
            CodecId::Tans => {
                let model = header.model()?;
                let r = u32::from(header.precision_bits);
                if r > tans::MAX_TABLE_BITS {
                    return Err(Error::PrecisionOutOfRange(r));
                }
                let mut reader = BitReader::new(payload);
                let offset = reader.read_bits(r).map_err(|_| Error::TruncatedPayload)? as u32;
                let body_len = reader.remaining();
                let mut w = BitWriter::new();
                while reader.remaining() > 0 {
                    let k = reader.remaining().min(u64::from(MAX_BITS_PER_CALL)) as u32;
                    w.write_bits(reader.read_bits(k)?, k);
                }
                Self::Tans {
                    model,
                    stream: TansBitstream {
                        x0: (1u32 << r) + offset,
                        bits: w.finish(),
                        bit_len: body_len,
                        len,
                    },
                }
            }
        };
        Ok(encoded)
    }

    /// Decodes the symbol sequence, validating every integrity condition.
    pub fn decode(&self) -> Result<Vec<usize>> {
        match self {
            Self::Uabs { params, x0, len } => Ok(abs::decode(params, x0, *len)?
                .into_iter()
                .map(usize::from)
                .collect()),
            Self::Rans { model, x0, len } => rans::decode(model, x0, *len, &BigUint::from(1u8)),
            Self::Stream {
                model,
                params,
                codeword,
            } => stream::decode(model, params, codeword),
            Self::Tans { model, stream } => {
                let tables = TansTables::build(model)?;
                let mut reader = BitReader::with_limit(&stream.bits, stream.bit_len);
                let out = tans::decode_from_reader(&tables, stream.x0, &mut reader, stream.len)?;
                // Up to seven zero bits of byte padding may follow the body.
                if reader.remaining() >= 8 || !reader.rest_is_zero() {
                    return Err(Error::TrailingBits(reader.remaining()));
                }
                Ok(out)
            }
        }
    }
}

fn put_magnitude(out: &mut Vec<u8>, x: &BigUint) {
    let bytes = if x.is_zero() { Vec::new() } else { x.to_bytes_be() };
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&bytes);
}
