//! rANS over a general alphabet with an unbounded integer state.
//!
//! Each encode step maps `x` to `N·floor(x/N_s) + d_s + (x mod N_s)`, which
//! appends roughly `lg(N/N_s)` bits of information to `x`. Decoding reverses
//! the chain front to back.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::model::QuantizedModel;

/// `x -> C(s, x)`.
pub fn encode_step(model: &QuantizedModel, symbol: usize, x: &BigUint) -> Result<BigUint> {
    if symbol >= model.len() {
        return Err(Error::UnknownSymbol(symbol));
    }
    let count = BigUint::from(model.count(symbol));
    let (q, r) = x.div_rem(&count);
    Ok(q * model.total() + model.cum(symbol) + r)
}

/// `x -> D(x) = (s, x')`, the inverse of [`encode_step`].
pub fn decode_step(model: &QuantizedModel, x: &BigUint) -> (usize, BigUint) {
    let (q, r) = x.div_rem(&BigUint::from(model.total()));
    let slot = r.to_u64().expect("remainder below N");
    let symbol = model.symbol_for(slot);
    let next = q * model.count(symbol) + (slot - model.cum(symbol));
    (symbol, next)
}

/// Encodes `symbols` back to front from `x_T = initial`; returns `x_0`.
pub fn encode(model: &QuantizedModel, symbols: &[usize], initial: &BigUint) -> Result<BigUint> {
    symbols
        .iter()
        .rev()
        .try_fold(initial.clone(), |x, &s| encode_step(model, s, &x))
}

/// [`encode`] with the conventional `x_T = 1`.
pub fn encode_from_one(model: &QuantizedModel, symbols: &[usize]) -> Result<BigUint> {
    encode(model, symbols, &BigUint::one())
}

/// Decodes `len` symbols and checks that the chain ends at `expected_final`.
pub fn decode(
    model: &QuantizedModel,
    x0: &BigUint,
    len: usize,
    expected_final: &BigUint,
) -> Result<Vec<usize>> {
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(len.min(1 << 20));
    for _ in 0..len {
        let (s, next) = decode_step(model, &x);
        out.push(s);
        x = next;
    }
    if &x == expected_final {
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

    fn skewed() -> QuantizedModel {
        QuantizedModel::with_precision(vec![3, 1], 2).unwrap()
    }

    fn uniform4() -> QuantizedModel {
        QuantizedModel::with_precision(vec![1, 1, 1, 1], 2).unwrap()
    }

    #[test]
    fn encode_step_examples() {
        let m = skewed();
        assert_eq!(encode_step(&m, 0, &big(5)).unwrap(), big(6));
        assert_eq!(encode_step(&m, 1, &big(5)).unwrap(), big(23));
        assert_eq!(encode_step(&m, 0, &big(3)).unwrap(), big(4));
        assert_eq!(encode_step(&m, 2, &big(3)), Err(Error::UnknownSymbol(2)));
    }

    #[test]
    fn decode_step_examples() {
        let m = skewed();
        assert_eq!(decode_step(&m, &big(6)), (0, big(5)));
        assert_eq!(decode_step(&m, &big(23)), (1, big(5)));
        assert_eq!(decode_step(&m, &big(4)), (0, big(3)));
    }

    #[test]
    fn sequence_examples() {
        let m = skewed();
        assert_eq!(encode_from_one(&m, &[]).unwrap(), big(1));
        assert_eq!(encode_from_one(&m, &[0, 1]).unwrap(), big(9));
        // "cd" in a uniform 4-symbol model is the base-4 numeral 1·16 + 3·4 + 2.
        assert_eq!(encode_from_one(&uniform4(), &[2, 3]).unwrap(), big(30));

        assert_eq!(decode(&m, &big(9), 2, &big(1)).unwrap(), vec![0, 1]);
        assert_eq!(decode(&uniform4(), &big(30), 2, &big(1)).unwrap(), vec![2, 3]);
        assert_eq!(decode(&m, &big(9), 1, &big(1)), Err(Error::CorruptState));
        // At x = 1 symbol 0 maps 1 to 1, so extra zeros cost nothing.
        assert_eq!(decode(&m, &big(9), 3, &big(1)).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn non_power_of_two_totals_round_trip() {
        let m = QuantizedModel::from_counts(vec![2, 3, 5]).unwrap();
        let seq = [2, 0, 1, 1, 2, 2, 0, 1, 2, 2, 2];
        let x0 = encode(&m, &seq, &big(7)).unwrap();
        assert_eq!(decode(&m, &x0, seq.len(), &big(7)).unwrap(), seq);
    }
}
