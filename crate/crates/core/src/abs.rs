//! uABS: binary asymmetric numeral system with an exact rational `p1` and an
//! unbounded integer state.
//!
//! Two equivalent coding-function pairs exist. [`AbsVariant::CeilOnZero`]
//! rounds up on the zero branch of the encoder and is the natural choice for
//! `p1 <= 1/2`; [`AbsVariant::CeilOnOne`] mirrors it for `p1 > 1/2`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbsVariant {
    /// `C(0,x) = ceil((x+1)/p0) - 1`, `C(1,x) = floor(x/p1)`.
    CeilOnZero,
    /// `C(0,x) = floor(x/p0)`, `C(1,x) = ceil((x+1)/p1) - 1`.
    CeilOnOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbsParams {
    p1: Ratio<u64>,
    variant: AbsVariant,
}

impl AbsParams {
    /// `p1 = num/den` with the variant picked from `p1` (`CeilOnZero` iff `p1 <= 1/2`).
    pub fn new(num: u64, den: u64) -> Result<Self> {
        let p1 = Self::validate(num, den)?;
        let variant = if 2 * u128::from(*p1.numer()) <= u128::from(*p1.denom()) {
            AbsVariant::CeilOnZero
        } else {
            AbsVariant::CeilOnOne
        };
        Ok(Self { p1, variant })
    }

    pub fn with_variant(num: u64, den: u64, variant: AbsVariant) -> Result<Self> {
        Ok(Self {
            p1: Self::validate(num, den)?,
            variant,
        })
    }

    fn validate(num: u64, den: u64) -> Result<Ratio<u64>> {
        if den == 0 || num == 0 || num >= den {
            return Err(Error::InvalidProbability(format!("{num}/{den}")));
        }
        Ok(Ratio::new(num, den))
    }

    /// `p1` in lowest terms.
    pub fn p1(&self) -> Ratio<u64> {
        self.p1
    }

    pub fn p0(&self) -> Ratio<u64> {
        Ratio::new(self.p1.denom() - self.p1.numer(), *self.p1.denom())
    }

    pub fn variant(&self) -> AbsVariant {
        self.variant
    }

    fn num(&self) -> u64 {
        *self.p1.numer()
    }

    fn den(&self) -> u64 {
        *self.p1.denom()
    }

    fn num0(&self) -> u64 {
        self.den() - self.num()
    }
}

fn div_floor(a: &BigUint, b: u64) -> BigUint {
    a / b
}

fn div_ceil(a: &BigUint, b: u64) -> BigUint {
    let (q, r) = a.div_rem(&BigUint::from(b));
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// `x -> C(s, x)`.
pub fn encode_step(params: &AbsParams, bit: bool, x: &BigUint) -> BigUint {
    let (num, den, num0) = (params.num(), params.den(), params.num0());
    match (params.variant, bit) {
        // ceil((x+1)·den/(den-num)) - 1
        (AbsVariant::CeilOnZero, false) => div_ceil(&((x + 1u32) * den), num0) - 1u32,
        (AbsVariant::CeilOnZero, true) => div_floor(&(x * den), num),
        (AbsVariant::CeilOnOne, false) => div_floor(&(x * den), num0),
        (AbsVariant::CeilOnOne, true) => div_ceil(&((x + 1u32) * den), num) - 1u32,
    }
}

/// `x -> D(x) = (s, x')`, the inverse of [`encode_step`].
pub fn decode_step(params: &AbsParams, x: &BigUint) -> (bool, BigUint) {
    let (num, den) = (params.num(), params.den());
    let scaled = x * num;
    let scaled_next = &scaled + num;
    let (here, next) = match params.variant {
        AbsVariant::CeilOnZero => (div_ceil(&scaled, den), div_ceil(&scaled_next, den)),
        AbsVariant::CeilOnOne => (div_floor(&scaled, den), div_floor(&scaled_next, den)),
    };
    if next > here {
        (true, here)
    } else {
        (false, x - here)
    }
}

/// Encodes `bits[0..T]` back to front starting from `x_T = 1`; returns `x_0`.
pub fn encode(params: &AbsParams, bits: &[bool]) -> BigUint {
    bits.iter()
        .rev()
        .fold(BigUint::one(), |x, &b| encode_step(params, b, &x))
}

/// Decodes `len` bits from `x0`, requiring the chain to end in state 1.
pub fn decode(params: &AbsParams, x0: &BigUint, len: usize) -> Result<Vec<bool>> {
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(len.min(1 << 20));
    for _ in 0..len {
        if x.is_zero() {
            return Err(Error::CorruptState);
        }
        let (bit, next) = decode_step(params, &x);
        out.push(bit);
        x = next;
    }
    if x.is_one() {
        Ok(out)
    } else {
        Err(Error::CorruptState)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|b| b == b'1').collect()
    }

    #[test]
    fn variant_selection() {
        assert_eq!(AbsParams::new(1, 4).unwrap().variant(), AbsVariant::CeilOnZero);
        assert_eq!(AbsParams::new(1, 2).unwrap().variant(), AbsVariant::CeilOnZero);
        assert_eq!(AbsParams::new(3, 4).unwrap().variant(), AbsVariant::CeilOnOne);
        assert_eq!(AbsParams::new(2, 4).unwrap().p1(), Ratio::new(1, 2));
        for (n, d) in [(0, 4), (4, 4), (5, 4), (1, 0)] {
            assert!(AbsParams::new(n, d).is_err());
        }
    }

    #[test]
    fn encode_step_examples() {
        let p = AbsParams::new(1, 4).unwrap();
        assert_eq!(encode_step(&p, true, &big(3)), big(12));
        assert_eq!(encode_step(&p, false, &big(3)), big(5));
        let half = AbsParams::new(1, 2).unwrap();
        assert_eq!(encode_step(&half, true, &big(3)), big(6));
    }

    #[test]
    fn decode_step_examples() {
        let p = AbsParams::new(1, 4).unwrap();
        assert_eq!(decode_step(&p, &big(12)), (true, big(3)));
        assert_eq!(decode_step(&p, &big(5)), (false, big(3)));
        let half = AbsParams::new(1, 2).unwrap();
        assert_eq!(decode_step(&half, &big(6)), (true, big(3)));
    }

    #[test]
    fn sequence_examples() {
        let p = AbsParams::new(1, 4).unwrap();
        assert_eq!(encode(&p, &[]), big(1));
        assert_eq!(encode(&p, &bits("10")), big(8));
        let half = AbsParams::new(1, 2).unwrap();
        assert_eq!(encode(&half, &bits("111")), big(8));

        assert_eq!(decode(&p, &big(8), 2).unwrap(), bits("10"));
        assert_eq!(decode(&half, &big(8), 3).unwrap(), bits("111"));
        assert_eq!(decode(&p, &big(8), 3), Err(Error::CorruptState));
    }

    #[test]
    fn ceil_on_one_mirrors_ceil_on_zero() {
        // Swapping the roles of 0 and 1 maps one variant onto the other.
        let low = AbsParams::new(1, 4).unwrap();
        let high = AbsParams::new(3, 4).unwrap();
        for x in 1..500u64 {
            for b in [false, true] {
                assert_eq!(
                    encode_step(&low, b, &big(x)),
                    encode_step(&high, !b, &big(x))
                );
            }
        }
    }

    #[test]
    fn overriding_the_variant_still_round_trips() {
        let p = AbsParams::with_variant(1, 2, AbsVariant::CeilOnOne).unwrap();
        let seq = bits("0110100111010");
        assert_eq!(decode(&p, &encode(&p, &seq), seq.len()).unwrap(), seq);
    }
}
