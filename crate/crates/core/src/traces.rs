//! Transfer matrices `M_c`, discriminants `t_c = tr M_c`, the dilated
//! Chebyshev polynomials `S_n` and the algebraic identities tying them.
//!
//! Two substrates are offered. Polynomial matrices in `E` over any [`Ring`]
//! (exact with [`BigRational`](num_rational::BigRational) coefficients) are
//! limited to periods up to [`MAX_POLY_PERIOD`]. The numeric [`Discriminant`]
//! multiplies 2×2 matrices along the period at a fixed energy and has no such
//! limit.

use crate::cf::CfWord;
use crate::error::{Error, Result};
use crate::num::{Mat2, Poly, Real, Ring};
use crate::words::{period_of_slope, MAX_PERIOD};

use num_traits::ToPrimitive;

/// Longest period for which polynomial matrices are built.
pub const MAX_POLY_PERIOD: u64 = 512;

pub type TracePoly<T> = Poly<T>;
pub type Mat2Poly<T> = Mat2<Poly<T>>;

/// `A(n) = (E − V·bit, −1; 1, 0)`.
pub fn one_step<T: Ring>(bit: i8, v: &T) -> Mat2Poly<T> {
    let diag = Poly::new(vec![-(v.clone() * T::from_i64(bit as i64)), T::one()]);
    Mat2::new(diag, Poly::constant(-T::one()), Poly::one(), Poly::zero())
}

/// `M_[0] = (1, −V; 0, 1)`.
pub fn m_root<T: Ring>(v: &T) -> Mat2Poly<T> {
    Mat2::new(Poly::one(), Poly::constant(-v.clone()), Poly::zero(), Poly::one())
}

/// `M_[0,0] = (E, −1; 1, 0)`.
pub fn m_base<T: Ring>() -> Mat2Poly<T> {
    one_step(0, &T::zero())
}

/// Potential values along one period of `ω_{φ(c)}`; `None` when `φ(c) = ∞`.
pub fn period_bits(c: &CfWord) -> Result<Option<Vec<i8>>> {
    let val = c.evaluate();
    if val.is_infinite() {
        return match c.entries() {
            [0] | [0, 0, 0] | [0, 0, 1, -1] => Ok(None),
            _ => Err(Error::UnsupportedValue(format!("{c} evaluates to inf"))),
        };
    }
    if *val.numer() == (-1).into() && *val.denom() == 1.into() {
        return Ok(Some(vec![-1]));
    }
    if !val.in_unit_interval() {
        return Err(Error::UnsupportedValue(format!("{c} has value {val}")));
    }
    let q = val.denom().to_u64().unwrap_or(u64::MAX);
    if q > MAX_PERIOD {
        return Err(Error::PeriodTooLong { len: q, limit: MAX_PERIOD });
    }
    let p = val.numer().to_u64().expect("0 ≤ p ≤ q");
    let w = period_of_slope(p, q)?;
    Ok(Some(w.iter().map(|b| b as i8).collect()))
}

fn check_poly_period(c: &CfWord) -> Result<()> {
    let q = c.evaluate().denom().to_u64().unwrap_or(u64::MAX);
    if q > MAX_POLY_PERIOD {
        return Err(Error::PeriodTooLong { len: q, limit: MAX_POLY_PERIOD });
    }
    Ok(())
}

/// `M_c` as the ordered product `A(q−1)⋯A(0)` over the period of `φ(c)`.
///
/// Every word with `φ(c) = ∞` gets `M_[0]`.
pub fn transfer_matrix_direct<T: Ring>(c: &CfWord, v: &T) -> Result<Mat2Poly<T>> {
    check_poly_period(c)?;
    let Some(bits) = period_bits(c)? else {
        return Ok(m_root(v));
    };
    let mut m = Mat2::identity();
    for &b in &bits {
        m = one_step(b, v).mul(&m);
    }
    Ok(m)
}

/// The word with a trailing `−1` resolved by decrementing its predecessor.
fn without_minus_one(c: &CfWord) -> CfWord {
    let mut e = c.entries().to_vec();
    while e.len() > 3 && *e.last().expect("non-empty") == -1 {
        e.pop();
        *e.last_mut().expect("non-empty") -= 1;
    }
    CfWord::new(e).expect("decrement keeps the word valid")
}

/// Matrices of all prefixes `[0], [0,0], [0,0,c_1], …` of a word whose
/// entries are non-negative.
fn prefix_matrices<T: Ring>(entries: &[i64], v: &T) -> Vec<Mat2Poly<T>> {
    let mut ms = vec![m_root(v)];
    if entries.len() >= 2 {
        ms.push(m_base());
    }
    for (j, &ck) in entries.iter().enumerate().skip(2) {
        let k = j - 1;
        let (prev, prev2) = (&ms[j - 1], &ms[j - 2]);
        let m = if k % 2 == 0 { prev.pow(ck).mul(prev2) } else { prev2.mul(&prev.pow(ck)) };
        ms.push(m);
    }
    ms
}

/// `M_c` by the parity-split recursion `M_k = M_{k−1}^{c_k} M_{k−2}` (even `k`)
/// and `M_k = M_{k−2} M_{k−1}^{c_k}` (odd `k`).
pub fn transfer_matrix_recursive<T: Ring>(c: &CfWord, v: &T) -> Result<Mat2Poly<T>> {
    check_poly_period(c)?;
    period_bits(c)?;
    if c.entries() == [0, 0, -1] {
        return Ok(one_step(-1, v));
    }
    let r = without_minus_one(c);
    Ok(prefix_matrices(r.entries(), v).pop().expect("non-empty"))
}

fn mat_agrees<R: Ring>(a: &Mat2<R>, b: &Mat2<R>) -> bool {
    a.entries().iter().zip(b.entries()).all(|(x, y)| x.agrees(y))
}

/// `M_c`, computed by both routes; they must agree.
pub fn transfer_matrix<T: Ring>(c: &CfWord, v: &T) -> Result<Mat2Poly<T>> {
    let direct = transfer_matrix_direct(c, v)?;
    let rec = transfer_matrix_recursive(c, v)?;
    if !mat_agrees(&direct, &rec) {
        return Err(Error::RouteMismatch(format!("transfer matrix of {c}")));
    }
    Ok(rec)
}

/// `t_c = tr M_c` as a polynomial in `E`.
///
/// A trailing `−1` goes through `tr(M_{k−2} · M_{k−1}^{-1})`; the result is
/// checked against the trace of the direct product.
pub fn discriminant<T: Ring>(c: &CfWord, v: &T) -> Result<TracePoly<T>> {
    let direct = transfer_matrix_direct(c, v)?.trace();
    let e = c.entries();
    let via = if c.depth() >= 1 && c.last() == -1 {
        let ms = prefix_matrices(&e[..e.len() - 1], v);
        let n = ms.len();
        ms[n - 2].mul(&ms[n - 1].adj()).trace()
    } else {
        transfer_matrix_recursive(c, v)?.trace()
    };
    if !direct.agrees(&via) {
        return Err(Error::RouteMismatch(format!("discriminant of {c}")));
    }
    Ok(via)
}

/// Numeric discriminant: matrices are multiplied along the period at a given
/// energy, never expanded into a polynomial.
#[derive(Clone, Debug)]
pub struct Discriminant {
    bits: Option<Vec<i8>>,
    v: f64,
}

impl Discriminant {
    pub fn new(c: &CfWord, v: f64) -> Result<Self> {
        Ok(Discriminant { bits: period_bits(c)?, v })
    }

    /// Bits must lie in `{−1, 0, 1}`.
    pub fn from_bits(bits: Vec<i8>, v: f64) -> Self {
        assert!(bits.iter().all(|b| (-1..=1).contains(b)), "potential bits must lie in {{-1, 0, 1}}");
        Discriminant { bits: Some(bits), v }
    }

    pub fn coupling(&self) -> f64 {
        self.v
    }

    /// Potential bits of one period; `None` for `φ = ∞`.
    pub fn bits(&self) -> Option<&[i8]> {
        self.bits.as_deref()
    }

    /// Period length `q` (zero for `φ = ∞`).
    pub fn period(&self) -> usize {
        self.bits.as_ref().map_or(0, Vec::len)
    }

    /// `M_c(E)` at a numeric energy.
    pub fn matrix<T: Real>(&self, e: &T) -> Mat2<T> {
        let v = T::from_f64(self.v);
        let Some(bits) = &self.bits else {
            return Mat2::new(T::one(), -v, T::zero(), T::one());
        };
        // Rows (a, b) and (c, d); left multiplication by A shifts the top row down.
        let (mut a, mut b, mut c, mut d) = (T::one(), T::zero(), T::zero(), T::one());
        for &bit in bits {
            let x = e.clone() - v.clone() * T::from_i64(bit as i64);
            let na = x.clone() * a.clone() - c.clone();
            let nb = x * b.clone() - d.clone();
            c = a;
            d = b;
            a = na;
            b = nb;
        }
        Mat2::new(a, b, c, d)
    }

    pub fn eval<T: Real>(&self, e: &T) -> T {
        let Some(bits) = &self.bits else {
            return T::from_i64(2);
        };
        let xs = self.shifted(e);
        let (mut a, mut b, mut c, mut d) = (T::one(), T::zero(), T::zero(), T::one());
        for &bit in bits {
            let x = &xs[(bit + 1) as usize];
            let na = x.clone() * a.clone() - c;
            let nb = x.clone() * b.clone() - d;
            c = a;
            d = b;
            a = na;
            b = nb;
        }
        a + d
    }

    /// `(t_c(E), t_c'(E))`.
    pub fn eval_with_derivative<T: Real>(&self, e: &T) -> (T, T) {
        let Some(bits) = &self.bits else {
            return (T::from_i64(2), T::zero());
        };
        let xs = self.shifted(e);
        let (mut a, mut b, mut c, mut d) = (T::one(), T::zero(), T::zero(), T::one());
        let (mut da, mut db, mut dc, mut dd) = (T::zero(), T::zero(), T::zero(), T::zero());
        for &bit in bits {
            let x = &xs[(bit + 1) as usize];
            let nda = a.clone() + x.clone() * da.clone() - dc;
            let ndb = b.clone() + x.clone() * db.clone() - dd;
            let na = x.clone() * a.clone() - c;
            let nb = x.clone() * b.clone() - d;
            dc = da;
            dd = db;
            da = nda;
            db = ndb;
            c = a;
            d = b;
            a = na;
            b = nb;
        }
        (a + d, da + dd)
    }

    /// `E − V·b` for the bits `b = −1, 0, 1`.
    fn shifted<T: Real>(&self, e: &T) -> [T; 3] {
        let v = T::from_f64(self.v);
        [e.clone() + v.clone(), e.clone(), e.clone() - v]
    }
}

/// `S_n(x)` for `n ≥ −1`: `S_{−1} = 0`, `S_0 = 1`, `S_n = x S_{n−1} − S_{n−2}`.
pub fn dilated_cheb<T: Ring>(n: i64, x: &T) -> T {
    assert!(n >= -1, "S_n needs n ≥ -1");
    cheb_values(n, x).pop().expect("non-empty")
}

/// `S_{−1}(x), S_0(x), …, S_{n_max}(x)`.
pub fn cheb_values<T: Ring>(n_max: i64, x: &T) -> Vec<T> {
    let mut out = vec![T::zero()];
    if n_max >= 0 {
        out.push(T::one());
    }
    for _ in 1..=n_max {
        let n = out.len();
        let next = x.clone() * out[n - 1].clone() - out[n - 2].clone();
        out.push(next);
    }
    out
}

/// `S_n` as a polynomial in `x`.
pub fn cheb_poly<T: Ring>(n: i64) -> Poly<T> {
    dilated_cheb(n, &Poly::x())
}

/// `S_n` for `n ≥ −2`, with `S_{−2} = −1` from running the recursion backwards.
fn cheb_ext<R: Ring>(n: i64, x: &R) -> R {
    if n == -2 {
        -R::one()
    } else {
        dilated_cheb(n, x)
    }
}

/// Where trace identities take their traces and matrices from.
pub trait TraceSource {
    type R: Ring;
    fn trace(&self, c: &CfWord) -> Result<Self::R>;
    fn matrix(&self, c: &CfWord) -> Result<Mat2<Self::R>>;
    fn coupling(&self) -> Self::R;
}

/// Polynomial traces in `E` at a fixed coupling.
#[derive(Clone, Debug)]
pub struct Symbolic<T: Ring> {
    pub v: T,
}

impl<T: Ring> TraceSource for Symbolic<T> {
    type R = Poly<T>;
    fn trace(&self, c: &CfWord) -> Result<Poly<T>> {
        discriminant(c, &self.v)
    }
    fn matrix(&self, c: &CfWord) -> Result<Mat2<Poly<T>>> {
        transfer_matrix(c, &self.v)
    }
    fn coupling(&self) -> Poly<T> {
        Poly::constant(self.v.clone())
    }
}

/// Traces at a fixed numeric energy and coupling.
#[derive(Clone, Debug)]
pub struct AtEnergy<T: Real> {
    pub e: T,
    pub v: T,
}

impl<T: Real> AtEnergy<T> {
    fn product(&self, bits: &Option<Vec<i8>>) -> Mat2<T> {
        let Some(bits) = bits else {
            return Mat2::new(T::one(), -self.v.clone(), T::zero(), T::one());
        };
        let mut m = Mat2::identity();
        for &bit in bits {
            let x = self.e.clone() - self.v.clone() * T::from_i64(bit as i64);
            m = Mat2::new(x, -T::one(), T::one(), T::zero()).mul(&m);
        }
        m
    }
}

impl<T: Real> TraceSource for AtEnergy<T> {
    type R = T;
    fn trace(&self, c: &CfWord) -> Result<T> {
        Ok(self.matrix(c)?.trace())
    }
    fn matrix(&self, c: &CfWord) -> Result<Mat2<T>> {
        Ok(self.product(&period_bits(c)?))
    }
    fn coupling(&self) -> T {
        self.v.clone()
    }
}

/// `t_{[c,m+1]} = t_c t_{[c,m]} − t_{[c,m−1]}`.
pub fn trace_step<R: Ring>(t_c: &R, t_cm: &R, t_cm_minus: &R) -> R {
    t_c.clone() * t_cm.clone() - t_cm_minus.clone()
}

/// `S_{l+1}(t_c) t_{[c,m−l]} − S_l(t_c) t_{[c,m−l−1]}`, which equals `t_{[c,m+1]}`.
pub fn trace_cheb_combine<S: TraceSource>(src: &S, c: &CfWord, m: i64, l: i64) -> Result<S::R> {
    if !(m >= l && l >= -1) {
        return Err(Error::UnsupportedValue(format!("need m ≥ l ≥ -1, got m={m}, l={l}")));
    }
    let tc = src.trace(c)?;
    let a = src.trace(&c.extend(m - l)?)?;
    let b = src.trace(&c.extend(m - l - 1)?)?;
    let s = cheb_values(l + 1, &tc);
    let n = s.len();
    Ok(s[n - 1].clone() * a - s[n - 2].clone() * b)
}

/// `S_{m−ℓ−1}(t_c) t_{[c,1+ℓ]} − S_{m−ℓ−2}(t_c) t_{[c,ℓ]}` for `ℓ ∈ {−1, 0}`,
/// which equals `t_{[c,m]}`.
pub fn ext_cheby_form1<S: TraceSource>(src: &S, c: &CfWord, m: i64, ell: i64) -> Result<S::R> {
    check_ell(ell)?;
    let tc = src.trace(c)?;
    let a = src.trace(&c.extend(1 + ell)?)?;
    let b = src.trace(&c.extend(ell)?)?;
    Ok(cheb_ext(m - ell - 1, &tc) * a - cheb_ext(m - ell - 2, &tc) * b)
}

fn check_ell(ell: i64) -> Result<()> {
    if ell == -1 || ell == 0 {
        Ok(())
    } else {
        Err(Error::UnsupportedValue(format!("ell must be -1 or 0, got {ell}")))
    }
}

/// LHS − RHS of
/// `S_{m−1−ℓ}(t_c)[t_{[c,m−1]} + (−1)^ξ t_{[c,1+ℓ]}] = [S_{m−2−ℓ}(t_c) + (−1)^ξ][t_{[c,m]} + (−1)^ξ t_{[c,ℓ]}]`.
pub fn ext_cheby_form2_residual<S: TraceSource>(src: &S, c: &CfWord, m: i64, xi: u8, ell: i64) -> Result<S::R> {
    check_ell(ell)?;
    if m < 1 {
        return Err(Error::UnsupportedValue(format!("need m ≥ 1, got {m}")));
    }
    let sign = S::R::from_i64(if xi % 2 == 0 { 1 } else { -1 });
    let tc = src.trace(c)?;
    let t_m1 = src.trace(&c.extend(m - 1)?)?;
    let t_m = src.trace(&c.extend(m)?)?;
    let t_1l = src.trace(&c.extend(1 + ell)?)?;
    let t_l = src.trace(&c.extend(ell)?)?;
    let lhs = cheb_ext(m - 1 - ell, &tc) * (t_m1 + sign.clone() * t_1l);
    let rhs = (cheb_ext(m - 2 - ell, &tc) + sign.clone()) * (t_m + sign * t_l);
    Ok(lhs - rhs)
}

/// `t_c² + t_{[c,m]}² + t_{[c,m−1]}² − t_c t_{[c,m]} t_{[c,m−1]} − (4 + V²)`.
pub fn fricke_vogt_residual<S: TraceSource>(src: &S, c: &CfWord, m: i64) -> Result<S::R> {
    let a = src.trace(c)?;
    let b = src.trace(&c.extend(m)?)?;
    let d = src.trace(&c.extend(m - 1)?)?;
    let v = src.coupling();
    let lhs = a.clone() * a.clone() + b.clone() * b.clone() + d.clone() * d.clone() - a * b * d;
    Ok(lhs - (S::R::from_i64(4) + v.clone() * v))
}

/// `[M_{[c,m]}, M_c M_{[c,m]}^n]² − V²·𝟙`; negative `n` uses the adjugate.
pub fn commutator_residual<S: TraceSource>(src: &S, c: &CfWord, m: i64, n: i64) -> Result<Mat2<S::R>> {
    let cm = c.extend(m)?;
    cm.extend(n)?;
    let a = src.matrix(&cm)?;
    let b = src.matrix(c)?.mul(&a.pow(n));
    let k = a.mul(&b).sub(&b.mul(&a));
    let v = src.coupling();
    Ok(k.mul(&k).sub(&Mat2::identity().scale(&(v.clone() * v))))
}

/// Residuals of `t_{[c,0]} = t_{c⁻⁻}`, `t_{[c,−1]} = t_{c with c_k − 1}` and
/// `t_{[c,1]} = t_{c with c_k + 1}`, where `c⁻⁻` drops the last entry of `c`.
pub fn first_trace_residuals<S: TraceSource>(src: &S, c: &CfWord) -> Result<[S::R; 3]> {
    if c.depth() < 1 || c.last() < 1 {
        return Err(Error::UnsupportedValue(format!("{c} needs a positive last entry")));
    }
    let shifted = |d: i64| {
        let mut e = c.entries().to_vec();
        *e.last_mut().expect("non-empty") += d;
        CfWord::new(e)
    };
    let parent = c.parent().expect("depth ≥ 1");
    Ok([
        src.trace(&c.extend(0)?)? - src.trace(&parent)?,
        src.trace(&c.extend(-1)?)? - src.trace(&shifted(-1)?)?,
        src.trace(&c.extend(1)?)? - src.trace(&shifted(1)?)?,
    ])
}
