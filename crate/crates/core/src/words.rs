//! Mechanical words `ω_α(n) = ⌊(n+1)α⌋ − ⌊nα⌋` and their periods `W_k`.

use std::fmt;

use bitvec::prelude::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::cf::{CfStream, CfWord, Rational};
use crate::error::{Error, Result};

/// Longest period the library materializes.
pub const MAX_PERIOD: u64 = 1 << 24;

/// Whether slope `-1` is admitted (every site then carries `-1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Standard,
    NegativeSlope,
}

/// Packed finite word over `{0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    bits: BitVec<u64, Lsb0>,
}

impl BitWord {
    pub fn new() -> Self {
        BitWord::default()
    }

    pub fn parse(s: &str) -> Option<Self> {
        let mut w = BitWord::new();
        for ch in s.chars() {
            match ch {
                '0' => w.push(false),
                '1' => w.push(true),
                _ => return None,
            }
        }
        Some(w)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Bit at a cyclic index.
    pub fn at(&self, i: i64) -> bool {
        self.bits[i.rem_euclid(self.len() as i64) as usize]
    }

    pub fn ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().by_vals()
    }

    pub fn append(&mut self, other: &BitWord) {
        self.bits.extend_from_bitslice(&other.bits);
    }

    pub fn repeat(&self, n: usize) -> BitWord {
        let mut out = BitWord::new();
        for _ in 0..n {
            out.append(self);
        }
        out
    }

    /// Equality up to a cyclic shift.
    pub fn cyclic_eq(&self, other: &BitWord) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let n = self.len() as i64;
        (0..n.max(1)).any(|s| (0..n).all(|i| self.at(i + s) == other.at(i)))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

/// `⌊(n+1)α⌋ − ⌊nα⌋` in exact arithmetic.
pub fn mechanical_bit(alpha: &Rational, n: i64, conv: Convention) -> Result<i8> {
    if alpha.is_infinite() {
        return Err(Error::InfiniteSlope(alpha.to_string()));
    }
    let neg_one = Rational::new(-1, 1);
    let admissible = alpha.in_unit_interval() || (conv == Convention::NegativeSlope && *alpha == neg_one);
    if !admissible {
        return Err(Error::UnsupportedValue(format!("slope {alpha}")));
    }
    let (p, q) = (alpha.numer(), alpha.denom());
    let hi = (BigInt::from(n + 1) * p).div_floor(q);
    let lo = (BigInt::from(n) * p).div_floor(q);
    Ok((hi - lo).to_i8().expect("bit"))
}

/// Float version of the mechanical bit, for irrational slopes in `[0, 1)`.
pub fn mechanical_bit_real(alpha: f64, n: i64) -> u8 {
    (((n + 1) as f64 * alpha).floor() - (n as f64 * alpha).floor()) as u8
}

/// Exact period of the mechanical word of slope `p/q ∈ [0, 1]`.
pub fn period_of_slope(p: u64, q: u64) -> Result<BitWord> {
    if q == 0 {
        return Err(Error::InfiniteSlope(format!("{p}/0")));
    }
    if q > MAX_PERIOD {
        return Err(Error::PeriodTooLong { len: q, limit: MAX_PERIOD });
    }
    let (p, q) = (p as u128, q as u128);
    let mut w = BitWord::new();
    for i in 0..q {
        w.push((i + 1) * p / q - i * p / q == 1);
    }
    Ok(w)
}

/// The period `W` of `ω_{φ(c)}`, sampled from the floor formula.
pub fn period_direct(c: &CfWord) -> Result<BitWord> {
    let v = c.evaluate();
    if v.is_infinite() {
        return Err(Error::InfiniteSlope(c.to_string()));
    }
    if !v.in_unit_interval() {
        return Err(Error::UnsupportedValue(format!("{c} has value {v}")));
    }
    let q = v.denom().to_u64().ok_or(Error::PeriodTooLong { len: u64::MAX, limit: MAX_PERIOD })?;
    let p = v.numer().to_u64().expect("0 ≤ p ≤ q");
    period_of_slope(p, q)
}

/// Periods `W_0, …, W_k` of the convergents of the entries `c_1, …, c_k`,
/// built by concatenation.
pub fn period_chain(tail: &[u64], k: usize) -> Result<Vec<BitWord>> {
    assert!(k <= tail.len());
    let mut out: Vec<BitWord> = Vec::with_capacity(k + 1);
    out.push(BitWord::parse("0").expect("literal"));
    if k == 0 {
        return Ok(out);
    }
    let mut w1 = BitWord::parse("0").expect("literal").repeat(tail[0] as usize - 1);
    w1.push(true);
    out.push(w1);
    for j in 2..=k {
        let len = (out[j - 1].len() as u64)
            .saturating_mul(tail[j - 1])
            .saturating_add(out[j - 2].len() as u64);
        if len > MAX_PERIOD {
            return Err(Error::PeriodTooLong { len, limit: MAX_PERIOD });
        }
        let pow = out[j - 1].repeat(tail[j - 1] as usize);
        let mut w = BitWord::new();
        if j % 2 == 0 {
            w.append(&out[j - 2]);
            w.append(&pow);
        } else {
            w.append(&pow);
            w.append(&out[j - 2]);
        }
        out.push(w);
    }
    Ok(out)
}

/// `W_k` of a stream by the concatenation recursion.
pub fn period_recursive(stream: &CfStream, k: usize) -> Result<BitWord> {
    Ok(period_chain(&stream.entries(k), k)?.pop().expect("non-empty"))
}

/// First index where a claimed identity fails.
pub type Violation = (&'static str, i64);

fn check(name: &'static str, range: impl Iterator<Item = i64>, ok: impl Fn(i64) -> bool) -> std::result::Result<(), Violation> {
    for i in range {
        if !ok(i) {
            return Err((name, i));
        }
    }
    Ok(())
}

/// Prefix identities of `W_k` against `W_{k-1}` and `W_{k-2}` (`k ≥ 2`).
pub fn check_prefixes(ws: &[BitWord], k: usize) -> std::result::Result<(), Violation> {
    let (w, w1, w2) = (&ws[k], &ws[k - 1], &ws[k - 2]);
    let (q, q1, q2) = (w.len() as i64, w1.len() as i64, w2.len() as i64);
    if k % 2 == 0 {
        check("prefix W_k = W_{k-1}", 0..=q1 - 2, |i| w.at(i) == w1.at(i))?;
        check("prefix W_k = W_{k-2} periodic", 0..=q1 - 2, |i| w.at(i) == w2.at(i))
    } else {
        check("prefix W_k = W_{k-1} periodic", 0..=q - 2, |i| w.at(i) == w1.at(i))?;
        check("prefix W_k = W_{k-2}", 0..=q2 - 2, |i| w.at(i) == w2.at(i))
    }
}

/// Suffix identities of `W_k` (`k ≥ 2`).
pub fn check_suffixes(ws: &[BitWord], k: usize) -> std::result::Result<(), Violation> {
    let w = &ws[k];
    let q = w.len() as i64;
    let r = if k % 2 == 0 { &ws[k - 1] } else { &ws[k - 2] };
    let qr = r.len() as i64;
    check("suffix", 1..=qr, |i| w.at(q - i) == r.at(qr - i))
}

/// `W(i) = W(q − 1 − i)` for `1 ≤ i ≤ q − 2`.
pub fn check_palindrome(w: &BitWord) -> std::result::Result<(), Violation> {
    let q = w.len() as i64;
    check("palindrome", 1..=q - 2, |i| w.at(i) == w.at(q - 1 - i))
}

/// Shift by `q_{k-1}` inside `W_k` on the admissible index range (`k ≥ 2`).
pub fn check_subperiod_shift(ws: &[BitWord], k: usize) -> std::result::Result<(), Violation> {
    let w = &ws[k];
    let q = w.len() as i64;
    let q1 = ws[k - 1].len() as i64;
    if k % 2 == 0 {
        check("shift (k even)", 1..=q - 2, |i| w.at(i) == w.at(i + q1))
    } else {
        check("shift (k odd)", -q1 + 1..=q - q1 - 2, |i| w.at(i) == w.at(i + q1))
    }
}

/// `W_k(q_k − 1) = 1`.
pub fn check_last_bit(w: &BitWord) -> std::result::Result<(), Violation> {
    let q = w.len() as i64;
    check("last bit", q - 1..=q - 1, |i| w.at(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(e: &[i64]) -> CfWord {
        CfWord::new(e.to_vec()).unwrap()
    }

    #[test]
    fn bits_at_one_half() {
        let half = Rational::new(1, 2);
        assert_eq!(mechanical_bit(&half, 0, Convention::Standard).unwrap(), 0);
        assert_eq!(mechanical_bit(&half, 1, Convention::Standard).unwrap(), 1);
        assert_eq!(mechanical_bit(&Rational::new(0, 1), 7, Convention::Standard).unwrap(), 0);
    }

    #[test]
    fn negative_slope_needs_the_flag() {
        let m1 = Rational::new(-1, 1);
        assert!(mechanical_bit(&m1, 3, Convention::Standard).is_err());
        for n in -3..4 {
            assert_eq!(mechanical_bit(&m1, n, Convention::NegativeSlope).unwrap(), -1);
        }
        assert!(mechanical_bit(&Rational::infinity(), 0, Convention::NegativeSlope).is_err());
    }

    #[test]
    fn direct_periods() {
        assert_eq!(period_direct(&w(&[0, 0])).unwrap().to_string(), "0");
        assert_eq!(period_direct(&w(&[0, 0, 3])).unwrap().to_string(), "001");
        assert_eq!(period_direct(&w(&[0, 0, 1, 1])).unwrap().to_string(), "01");
        assert!(period_direct(&w(&[0])).is_err());
    }

    #[test]
    fn recursive_periods() {
        let f = CfStream::fibonacci();
        assert_eq!(period_recursive(&f, 2).unwrap().to_string(), "01");
        assert_eq!(period_recursive(&f, 3).unwrap().to_string(), "011");
        let s = CfStream::periodic(vec![2, 1, 1, 2]).unwrap();
        let w4 = period_recursive(&s, 4).unwrap();
        assert_eq!((w4.len(), w4.ones()), (13, 5));
        assert_eq!(w4, period_direct(&s.word(4)).unwrap());
    }

    #[test]
    fn cyclic_equality() {
        let a = BitWord::parse("0011").unwrap();
        let b = BitWord::parse("0110").unwrap();
        assert!(a.cyclic_eq(&b));
        assert!(!a.cyclic_eq(&BitWord::parse("0101").unwrap()));
    }
}
