//! Extended continued-fraction words, their value and convergents.
//!
//! A word is written `[0, c_0, c_1, …, c_k]` with the fixed entries
//! `c_{-1} = c_0 = 0`. Interior entries are positive and the last entry
//! may also be `0` or `-1`, which the evaluation map resolves by
//! truncation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Reduced fraction `p/q` with `q ≥ 0`; `1/0` stands for infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    p: BigInt,
    q: BigInt,
}

impl Rational {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        let (mut p, mut q) = (p.into(), q.into());
        if q.is_zero() {
            assert!(!p.is_zero(), "0/0 is not a value");
            return Rational::infinity();
        }
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        let g = p.gcd(&q);
        Rational { p: p / &g, q: q / g }
    }

    pub fn infinity() -> Self {
        Rational { p: BigInt::one(), q: BigInt::zero() }
    }

    pub fn is_infinite(&self) -> bool {
        self.q.is_zero()
    }

    pub fn numer(&self) -> &BigInt {
        &self.p
    }

    pub fn denom(&self) -> &BigInt {
        &self.q
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            return f64::INFINITY;
        }
        num_rational::BigRational::new(self.p.clone(), self.q.clone())
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    /// True for finite values in `[0, 1]`.
    pub fn in_unit_interval(&self) -> bool {
        !self.is_infinite() && !self.p.is_negative() && self.p <= self.q
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

/// A member of the extended continued-fraction space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CfWord {
    entries: Vec<i64>,
}

impl CfWord {
    /// Validates a full entry list `(c_{-1}, c_0, c_1, …, c_k)`.
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        let bad = |why: &str| Err(Error::MalformedWord(format!("{entries:?}: {why}")));
        match entries.len() {
            0 => return bad("empty"),
            1 if entries[0] != 0 => return bad("must start with 0"),
            1 => {}
            _ => {
                if entries[0] != 0 || entries[1] != 0 {
                    return bad("prefix must be (0, 0)");
                }
            }
        }
        if entries.len() > 2 {
            let tail = &entries[2..];
            let (last, interior) = tail.split_last().expect("non-empty");
            if interior.iter().any(|&c| c < 1) {
                return bad("interior entries must be positive");
            }
            if *last < -1 {
                return bad("last entry must be at least -1");
            }
        }
        Ok(CfWord { entries })
    }

    /// The word `[0]`.
    pub fn root() -> Self {
        CfWord { entries: vec![0] }
    }

    /// The word `[0, 0]`.
    pub fn base() -> Self {
        CfWord { entries: vec![0, 0] }
    }

    /// `[0, 0, c_1, …, c_k]` from the tail entries.
    pub fn from_tail(tail: &[i64]) -> Result<Self> {
        let mut e = vec![0, 0];
        e.extend_from_slice(tail);
        CfWord::new(e)
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Entries `c_1, …, c_k` (empty for `[0]` and `[0, 0]`).
    pub fn tail(&self) -> &[i64] {
        if self.entries.len() > 2 {
            &self.entries[2..]
        } else {
            &[]
        }
    }

    /// The index `k` of the last entry.
    pub fn depth(&self) -> i64 {
        self.entries.len() as i64 - 2
    }

    pub fn last(&self) -> i64 {
        *self.entries.last().expect("non-empty")
    }

    /// True if every tail entry is positive.
    pub fn is_regular(&self) -> bool {
        self.entries.len() >= 2 && self.tail().iter().all(|&c| c >= 1)
    }

    /// The word with its last entry removed.
    pub fn parent(&self) -> Option<CfWord> {
        (self.entries.len() > 1).then(|| CfWord { entries: self.entries[..self.entries.len() - 1].to_vec() })
    }

    /// `[c, m]`.
    pub fn extend(&self, m: i64) -> Result<CfWord> {
        let mut e = self.entries.clone();
        e.push(m);
        CfWord::new(e).map_err(|_| Error::InvalidExtension { word: self.to_string(), entry: m })
    }

    /// The evaluation map.
    pub fn evaluate(&self) -> Rational {
        let e = &self.entries;
        match e.len() {
            1 => return Rational::infinity(),
            2 => return Rational::new(0, 1),
            _ => {}
        }
        match self.last() {
            -1 if e.len() == 3 => Rational::new(-1, 1),
            -1 => {
                let mut v = e[..e.len() - 1].to_vec();
                *v.last_mut().expect("non-empty") -= 1;
                CfWord { entries: v }.evaluate()
            }
            0 => CfWord { entries: e[..e.len() - 2].to_vec() }.evaluate(),
            _ => {
                let tail: Vec<u64> = self.tail().iter().map(|&c| c as u64).collect();
                let (p, q) = convergents(&tail, tail.len()).pop().expect("non-empty");
                Rational::new(p, q)
            }
        }
    }

    /// A value-equal word with only positive tail entries, if the value is in `[0, 1]`.
    pub fn regular_form(&self) -> Option<CfWord> {
        let v = self.evaluate();
        if !v.in_unit_interval() {
            return None;
        }
        let tail = cf_of_rational(v.numer(), v.denom());
        Some(CfWord::from_tail(&tail.iter().map(|&c| c as i64).collect::<Vec<_>>()).expect("regular"))
    }
}

impl fmt::Display for CfWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Convergents `(p_k, q_k)` for `k = -1 ..= k_max` from entries `c_1, c_2, …`.
///
/// The seeds are `(p_{-1}, q_{-1}) = (1, 0)` and `(p_0, q_0) = (0, 1)`.
pub fn convergents(tail: &[u64], k_max: usize) -> Vec<(BigInt, BigInt)> {
    assert!(k_max <= tail.len(), "need {k_max} entries, have {}", tail.len());
    let mut out = Vec::with_capacity(k_max + 2);
    out.push((BigInt::one(), BigInt::zero()));
    out.push((BigInt::zero(), BigInt::one()));
    for &c in &tail[..k_max] {
        let n = out.len();
        let c = BigInt::from(c);
        let p = &c * &out[n - 1].0 + &out[n - 2].0;
        let q = &c * &out[n - 1].1 + &out[n - 2].1;
        out.push((p, q));
    }
    out
}

/// Continued-fraction tail `c_1, …` of a rational in `[0, 1]`, ending in an entry ≥ 2
/// unless the value is `1` (tail `[1]`) or `0` (empty tail).
pub fn cf_of_rational(p: &BigInt, q: &BigInt) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut a, mut b) = (q.clone(), p.clone());
    while !b.is_zero() {
        let (d, r) = a.div_rem(&b);
        out.push(d.to_u64().expect("entry fits"));
        a = b;
        b = r;
    }
    out
}

/// Continued-fraction entries of a real number in `(0, 1)`.
///
/// The expansion stops once the fractional remainder drops below `1e-12`.
pub fn cf_of_real(x: f64, depth: usize) -> Result<Vec<u64>> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::NotInUnitInterval(x));
    }
    let mut out = Vec::new();
    let mut r = x;
    while out.len() < depth {
        let y = 1.0 / r;
        let c = y.floor();
        let mut frac = y - c;
        let mut c = c as u64;
        if 1.0 - frac < 1e-12 {
            c += 1;
            frac = 0.0;
        }
        out.push(c);
        if frac < 1e-12 {
            break;
        }
        r = frac;
    }
    Ok(out)
}

/// An infinite continued fraction with eventually periodic entries `c_1, c_2, …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfStream {
    prefix: Vec<u64>,
    period: Vec<u64>,
}

impl CfStream {
    pub fn new(prefix: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::MalformedWord("stream needs a non-empty period".into()));
        }
        if prefix.iter().chain(&period).any(|&c| c < 1) {
            return Err(Error::MalformedWord("stream entries must be positive".into()));
        }
        Ok(CfStream { prefix, period })
    }

    pub fn periodic(period: Vec<u64>) -> Result<Self> {
        CfStream::new(Vec::new(), period)
    }

    /// The golden mean `(√5 − 1)/2 = [0; 1, 1, 1, …]`.
    pub fn fibonacci() -> Self {
        CfStream { prefix: Vec::new(), period: vec![1] }
    }

    /// Entry `c_k` for `k ≥ 1`.
    pub fn entry(&self, k: usize) -> u64 {
        assert!(k >= 1);
        let i = k - 1;
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// `c_1, …, c_n`.
    pub fn entries(&self, n: usize) -> Vec<u64> {
        (1..=n).map(|k| self.entry(k)).collect()
    }

    /// The convergent word `[0, 0, c_1, …, c_k]`.
    pub fn word(&self, k: usize) -> CfWord {
        let tail: Vec<i64> = self.entries(k).iter().map(|&c| c as i64).collect();
        CfWord::from_tail(&tail).expect("stream entries are positive")
    }

    /// `(p_k, q_k)` for `k = -1 ..= k_max`.
    pub fn convergents(&self, k_max: usize) -> Vec<(BigInt, BigInt)> {
        convergents(&self.entries(k_max), k_max)
    }

    /// Complete quotient `x_k = [c_k; c_{k+1}, …]`.
    fn complete_quotient(&self, k: usize) -> f64 {
        let mut x = self.entry(k + 64) as f64;
        for j in (k..k + 64).rev() {
            x = self.entry(j) as f64 + 1.0 / x;
        }
        x
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.complete_quotient(1)
    }

    /// `q_k α − p_k` for `k ≥ -1`, with full relative accuracy.
    pub fn delta(&self, k: i64) -> f64 {
        assert!(k >= -1);
        if k == -1 {
            return -1.0;
        }
        let conv = self.convergents(k as usize);
        let qk = conv[k as usize + 1].1.to_f64().expect("finite");
        let qk1 = conv[k as usize].1.to_f64().expect("finite");
        let x = self.complete_quotient(k as usize + 1);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign / (qk * x + qk1)
    }
}

impl fmt::Display for CfStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre: Vec<String> = self.prefix.iter().map(|c| c.to_string()).collect();
        let per: Vec<String> = self.period.iter().map(|c| c.to_string()).collect();
        if pre.is_empty() {
            write!(f, "({})*", per.join(","))
        } else {
            write!(f, "{},({})*", pre.join(","), per.join(","))
        }
    }
}
