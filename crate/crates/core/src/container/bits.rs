//! MSB-first bit packing.

use crate::error::{Error, Result};

/// Widest single read or write.
pub const MAX_BITS_PER_CALL: u32 = 57;

#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    pending: u32,
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `k` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, k: u32) {
        assert!(k <= MAX_BITS_PER_CALL, "write of {k} bits");
        debug_assert!(k == 64 || value >> k == 0, "value wider than {k} bits");
        if k == 0 {
            return;
        }
        self.acc = (self.acc << k) | value;
        self.pending += k;
        self.bit_len += u64::from(k);
        while self.pending >= 8 {
            self.pending -= 8;
            self.bytes.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1 << self.pending) - 1;
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Pads the last byte with zeros and returns the buffer.
    pub fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.bytes.push((self.acc << (8 - self.pending)) as u8);
        }
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    /// Reads every bit of `bytes`.
    pub fn new(bytes: &'a [u8]) -> Self {
        Self::with_limit(bytes, bytes.len() as u64 * 8)
    }

    /// Reads only the first `limit` bits (clamped to the buffer).
    pub fn with_limit(bytes: &'a [u8], limit: u64) -> Self {
        Self {
            bytes,
            pos: 0,
            limit: limit.min(bytes.len() as u64 * 8),
        }
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.pos
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn read_bits(&mut self, k: u32) -> Result<u64> {
        if k > MAX_BITS_PER_CALL || u64::from(k) > self.remaining() {
            return Err(Error::OutOfBits {
                requested: k,
                available: self.remaining(),
            });
        }
        let mut value = 0u64;
        let mut need = k;
        while need > 0 {
            let byte = self.bytes[(self.pos / 8) as usize];
            let avail = 8 - (self.pos % 8) as u32;
            let take = avail.min(need);
            let chunk = (u64::from(byte) >> (avail - take)) & ((1 << take) - 1);
            value = (value << take) | chunk;
            self.pos += u64::from(take);
            need -= take;
        }
        Ok(value)
    }

    /// True when every unread bit is zero.
    pub fn rest_is_zero(&self) -> bool {
        let mut probe = self.clone();
        while probe.remaining() > 0 {
            let k = probe.remaining().min(u64::from(MAX_BITS_PER_CALL)) as u32;
            if probe.read_bits(k).expect("within limit") != 0 {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packs_msb_first() {
        let mut w = BitWriter::new();
        w.write_bits(0b101, 3);
        w.write_bits(0b01, 2);
        assert_eq!(w.bit_len(), 5);
        assert_eq!(w.finish(), vec![0b1010_1000]);
    }

    #[test]
    fn zero_width_is_a_no_op() {
        let mut w = BitWriter::new();
        w.write_bits(0, 0);
        assert_eq!(w.bit_len(), 0);
        assert!(w.finish().is_empty());

        let bytes = [0xFFu8];
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_bits(0).unwrap(), 0);
        assert_eq!(r.position(), 0);
    }

    #[test]
    fn reading_past_the_end_fails() {
        let bytes = [0xA5u8];
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_bits(6).unwrap(), 0b101001);
        assert_eq!(
            r.read_bits(3),
            Err(Error::OutOfBits {
                requested: 3,
                available: 2
            })
        );
        let mut limited = BitReader::with_limit(&bytes, 3);
        assert!(limited.read_bits(4).is_err());
        assert_eq!(limited.read_bits(3).unwrap(), 0b101);
    }

    #[test]
    fn wide_values_cross_byte_boundaries() {
        let mut w = BitWriter::new();
        let v = (1u64 << 57) - 3;
        w.write_bits(1, 1);
        w.write_bits(v, 57);
        w.write_bits(0x2A, 6);
        let bytes = w.finish();
        assert_eq!(bytes.len(), 8);
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_bits(1).unwrap(), 1);
        assert_eq!(r.read_bits(57).unwrap(), v);
        assert_eq!(r.read_bits(6).unwrap(), 0x2A);
        assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn detects_nonzero_padding() {
        let bytes = [0b1000_0001u8];
        let mut r = BitReader::new(&bytes);
        r.read_bits(1).unwrap();
        assert!(!r.rest_is_zero());
        let bytes = [0b1000_0000u8];
        let mut r = BitReader::new(&bytes);
        r.read_bits(1).unwrap();
        assert!(r.rest_is_zero());
    }
}
