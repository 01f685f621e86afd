//! Scalar rings, dense polynomials in the energy and 2×2 matrices over them.
//!
//! Exact computations run over [`BigRational`], fast ones over `f64` and the
//! band-edge work over the double-double [`TwoFloat`].

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use twofloat::TwoFloat;

/// Commutative ring with the few conversions the trace algebra needs.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;

    /// Agreement between two routes: exact equality, or a relative `1e-9`
    /// for floating types.
    fn agrees(&self, other: &Self) -> bool {
        self == other
    }
}

macro_rules! ring_via_num {
    ($t:ty) => {
        impl Ring for $t {
            fn zero() -> Self {
                <$t as Zero>::zero()
            }
            fn one() -> Self {
                <$t as One>::one()
            }
            fn from_i64(n: i64) -> Self {
                <$t as FromPrimitive>::from_i64(n).expect("integer fits")
            }
            fn is_zero(&self) -> bool {
                Zero::is_zero(self)
            }
        }
    };
}

ring_via_num!(BigInt);
ring_via_num!(BigRational);

macro_rules! ring_float {
    ($t:ty) => {
        impl Ring for $t {
            fn zero() -> Self {
                <$t as Zero>::zero()
            }
            fn one() -> Self {
                <$t as One>::one()
            }
            fn from_i64(n: i64) -> Self {
                <$t as FromPrimitive>::from_i64(n).expect("integer fits")
            }
            fn is_zero(&self) -> bool {
                Zero::is_zero(self)
            }
            fn agrees(&self, other: &Self) -> bool {
                let (a, b) = (ToF64::to_f64(self), ToF64::to_f64(other));
                (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
            }
        }
    };
}

ring_float!(f64);
ring_float!(TwoFloat);

/// Ordered scalars that accept float input; evaluation along a period runs
/// over these.
pub trait Real: Ring + ToF64 + PartialOrd {
    fn from_f64(x: f64) -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
}

impl Real for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite")
    }
}

/// Scalars that can be turned into a float for reporting.
pub trait ToF64 {
    fn to_f64(&self) -> f64;
}

impl ToF64 for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl ToF64 for TwoFloat {
    fn to_f64(&self) -> f64 {
        self.hi() + self.lo()
    }
}

impl ToF64 for BigRational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational value of a double-double number.
pub fn dd_to_rational(x: TwoFloat) -> BigRational {
    let hi = BigRational::from_float(x.hi()).expect("finite");
    let lo = BigRational::from_float(x.lo()).expect("finite");
    hi + lo
}

pub fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// Double-double quotient with one correction step; the library operator
/// loses the low word.
pub fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q0 = a.hi() / b.hi();
    let r = a - b * TwoFloat::from(q0);
    let q1 = r.hi() / b.hi();
    let r2 = r - b * TwoFloat::from(q1);
    let q2 = r2.hi() / b.hi();
    TwoFloat::from(q0) + TwoFloat::from(q1) + TwoFloat::from(q2)
}

pub fn dd_abs(x: TwoFloat) -> TwoFloat {
    if x < TwoFloat::from(0.0) {
        -x
    } else {
        x
    }
}

/// Rational from a float given as `p/q` text or decimal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    let (int, frac) = s.split_once('.')?;
    let neg = int.starts_with('-');
    let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Dense polynomial in `E`, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Ring> {
    coeffs: Vec<T>,
}

impl<T: Ring> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `E`.
    pub fn x() -> Self {
        Poly::new(vec![T::zero(), T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, e: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * e.clone() + c.clone();
        }
        acc
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }
}

impl<T: Ring> Add for Poly<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(T::zero);
            let b = rhs.coeffs.get(i).cloned().unwrap_or_else(T::zero);
            out.push(a + b);
        }
        Poly::new(out)
    }
}

impl<T: Ring> Neg for Poly<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Poly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<T: Ring> Sub for Poly<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Ring> Mul for Poly<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let slot = std::mem::replace(&mut out[i + j], T::zero());
                out[i + j] = slot + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Ring> Ring for Poly<T> {
    fn zero() -> Self {
        Poly::new(Vec::new())
    }
    fn one() -> Self {
        Poly::constant(T::one())
    }
    fn from_i64(n: i64) -> Self {
        Poly::constant(T::from_i64(n))
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn agrees(&self, other: &Self) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|i| {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(T::zero);
            let b = other.coeffs.get(i).cloned().unwrap_or_else(T::zero);
            a.agrees(&b)
        })
    }
}

/// 2×2 matrix `(a, b; c, d)` over a ring.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<R: Ring> {
    pub a: R,
    pub b: R,
    pub c: R,
    pub d: R,
}

impl<R: Ring> Mat2<R> {
    pub fn new(a: R, b: R, c: R, d: R) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(R::one(), R::zero(), R::zero(), R::one())
    }

    pub fn det(&self) -> R {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn trace(&self) -> R {
        self.a.clone() + self.d.clone()
    }

    /// Adjugate; the inverse whenever the determinant is one.
    pub fn adj(&self) -> Self {
        Mat2::new(self.d.clone(), -self.b.clone(), -self.c.clone(), self.a.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Mat2::new(
            self.a.clone() * o.a.clone() + self.b.clone() * o.c.clone(),
            self.a.clone() * o.b.clone() + self.b.clone() * o.d.clone(),
            self.c.clone() * o.a.clone() + self.d.clone() * o.c.clone(),
            self.c.clone() * o.b.clone() + self.d.clone() * o.d.clone(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat2::new(
            self.a.clone() - o.a.clone(),
            self.b.clone() - o.b.clone(),
            self.c.clone() - o.c.clone(),
            self.d.clone() - o.d.clone(),
        )
    }

    pub fn scale(&self, s: &R) -> Self {
        Mat2::new(
            self.a.clone() * s.clone(),
            self.b.clone() * s.clone(),
            self.c.clone() * s.clone(),
            self.d.clone() * s.clone(),
        )
    }

    /// Integer power; negative exponents use the adjugate (unimodular input).
    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.adj() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Mat2::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn entries(&self) -> [&R; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }
}

impl<T: Ring> Mat2<Poly<T>> {
    pub fn eval(&self, e: &T) -> Mat2<T> {
        Mat2::new(self.a.eval(e), self.b.eval(e), self.c.eval(e), self.d.eval(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn poly_product_and_eval() {
        let p = Poly::new(vec![1.0, 1.0]);
        let q = p.clone() * p.clone();
        assert_eq!(q.coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(q.eval(&3.0), 16.0);
        assert!((p.clone() - p).is_zero());
    }

    #[test]
    fn adjugate_power_inverts() {
        let m = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let r = m.pow(3).mul(&m.pow(-3));
        assert_eq!(r, Mat2::identity());
    }

    #[test]
    fn parse_fractions_and_decimals() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(parse_rational("1/2"), Some(half.clone()));
        assert_eq!(parse_rational("0.5"), Some(half));
        assert_eq!(parse_rational("-4.5"), Some(BigRational::new((-9).into(), 2.into())));
        assert_eq!(parse_rational("5"), Some(BigRational::from_integer(5.into())));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn double_double_converts_exactly() {
        let x = dd_div(TwoFloat::from(1.0), TwoFloat::from(3.0));
        let r = dd_to_rational(x);
        let third = BigRational::new(1.into(), 3.into());
        let err = (r - third).abs();
        assert!(err < BigRational::new(1.into(), BigInt::from(10).pow(30)));
        let y = dd_div(dd(2.0), dd(7.0) + dd(1e-20));
        let back = dd_to_rational(y) * dd_to_rational(dd(7.0) + dd(1e-20)) - BigRational::from_integer(2.into());
        assert!(back.abs() < BigRational::new(1.into(), BigInt::from(10).pow(30)));
    }
}
