//! Spectral bands of the periodic operators `H_{p/q,V}`, their backward types
//! and the forward (nesting and interlacing) structure for `V > 4`.
//!
//! Band edges are the roots of `t_c(E) = ±2`. They are isolated in `f64` by
//! inertia counts of the Bloch matrices `H_c(0)` and `H_c(π)` and then polished
//! to double-double accuracy by Newton steps on the numeric discriminant.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::cf::{CfStream, CfWord, Rational};
use crate::error::{Error, Result};
use crate::num::{dd, dd_div, ToF64};
use crate::traces::{period_bits, Discriminant};

/// Strictness tolerance `1e-9 · max(1, |E|)` for inclusions and orderings.
pub fn tolerance(e: f64) -> f64 {
    1e-9 * e.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BandType {
    A,
    B,
    Unclassified,
}

impl fmt::Display for BandType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandType::A => "A",
            BandType::B => "B",
            BandType::Unclassified => "?",
        })
    }
}

/// A spectral band `[lo, hi]` of `σ_c(V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub lo: TwoFloat,
    pub hi: TwoFloat,
    pub owner: CfWord,
    /// Position among the bands of the owner, counted from the left.
    pub index: usize,
    /// Sign of `t_c'` inside the band.
    pub slope: i8,
    pub btype: BandType,
}

impl Band {
    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).to_f64()
    }

    pub fn mid(&self) -> f64 {
        ((self.lo + self.hi) * dd(0.5)).to_f64()
    }

    fn scale(&self) -> f64 {
        self.lo_f64().abs().max(self.hi_f64().abs())
    }

    /// `min(self.lo − outer.lo, outer.hi − self.hi)`; positive iff `self` lies
    /// strictly inside `outer`.
    pub fn inclusion_margin(&self, outer: &Band) -> f64 {
        let l = (self.lo - outer.lo).to_f64();
        let r = (outer.hi - self.hi).to_f64();
        l.min(r)
    }

    /// `right.lo − self.hi`; positive iff `self` lies strictly left of `right`.
    pub fn separation(&self, right: &Band) -> f64 {
        (right.lo - self.hi).to_f64()
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo_f64() <= e && e <= self.hi_f64()
    }
}

/// `σ_c(V)`: all of `ℝ` when `φ(c) = ∞`, else `q` bands.
#[derive(Clone, Debug, PartialEq)]
pub enum Spectrum {
    Whole,
    Bands(Arc<Vec<Band>>),
}

impl Spectrum {
    pub fn bands(&self) -> &[Band] {
        match self {
            Spectrum::Whole => &[],
            Spectrum::Bands(b) => b,
        }
    }

    /// Best inclusion margin of `band` in one of the bands; `+∞` for `ℝ`.
    pub fn inclusion_margin(&self, band: &Band) -> f64 {
        match self {
            Spectrum::Whole => f64::INFINITY,
            Spectrum::Bands(bs) => {
                // min(lo − J.lo, J.hi − hi) peaks where the midpoints cross.
                let mid = band.lo + band.hi;
                let i = bs.partition_point(|j| j.lo + j.hi < mid);
                bs[i.saturating_sub(1)..(i + 1).min(bs.len())]
                    .iter()
                    .map(|j| band.inclusion_margin(j))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// The bands lying strictly inside `outer`.
    pub fn inside(&self, outer: &Band) -> Vec<Band> {
        let bs = self.bands();
        let start = bs.partition_point(|j| j.lo <= outer.lo);
        let end = bs.partition_point(|j| j.hi < outer.hi).max(start);
        bs[start..end].iter().filter(|j| j.inclusion_margin(outer) > 0.0).cloned().collect()
    }

    pub fn measure(&self) -> f64 {
        match self {
            Spectrum::Whole => f64::INFINITY,
            Spectrum::Bands(bs) => bs.iter().map(Band::width).sum(),
        }
    }
}

/// The Bloch matrix `H_c(θ)`.
pub fn bloch_matrix(c: &CfWord, v: f64, theta: f64) -> Result<DMatrix<Complex64>> {
    let bits = period_bits(c)?.ok_or_else(|| Error::InfiniteSlope(c.to_string()))?;
    let q = bits.len();
    let diag = |i: usize| Complex64::new(v * bits[i] as f64, 0.0);
    let phase = Complex64::from_polar(1.0, theta);
    let mut h = DMatrix::from_element(q, q, Complex64::new(0.0, 0.0));
    match q {
        1 => h[(0, 0)] = diag(0) + Complex64::new(2.0 * theta.cos(), 0.0),
        2 => {
            h[(0, 0)] = diag(0);
            h[(1, 1)] = diag(1);
            h[(0, 1)] = Complex64::new(1.0, 0.0) + phase.conj();
            h[(1, 0)] = Complex64::new(1.0, 0.0) + phase;
        }
        _ => {
            for i in 0..q {
                h[(i, i)] = diag(i);
                if i + 1 < q {
                    h[(i, i + 1)] = Complex64::new(1.0, 0.0);
                    h[(i + 1, i)] = Complex64::new(1.0, 0.0);
                }
            }
            h[(0, q - 1)] = phase.conj();
            h[(q - 1, 0)] = phase;
        }
    }
    Ok(h)
}

/// `|det(E − H_c(θ)) − (t_c(E) − 2cos θ)|`, the determinant by dense
/// elimination in complex double-double.
pub fn charpoly_residual(c: &CfWord, v: f64, theta: f64, e: f64) -> Result<f64> {
    let h = bloch_matrix(c, v, theta)?;
    let q = h.nrows();
    let mut m: Vec<Vec<Cdd>> = (0..q)
        .map(|i| {
            (0..q)
                .map(|j| {
                    let x = h[(i, j)];
                    let re = if i == j { dd(e) - dd(x.re) } else { -dd(x.re) };
                    Cdd(re, -dd(x.im))
                })
                .collect()
        })
        .collect();
    let det = dense_det(&mut m);
    let t: TwoFloat = Discriminant::new(c, v)?.eval(&dd(e));
    let expected = t - dd(2.0 * theta.cos());
    Ok(Complex64::new((det.0 - expected).to_f64(), det.1.to_f64()).norm())
}

#[derive(Clone, Copy)]
struct Cdd(TwoFloat, TwoFloat);

impl Cdd {
    fn mul(self, o: Cdd) -> Cdd {
        Cdd(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }

    fn sub(self, o: Cdd) -> Cdd {
        Cdd(self.0 - o.0, self.1 - o.1)
    }

    fn norm_sqr(self) -> TwoFloat {
        self.0 * self.0 + self.1 * self.1
    }

    fn div(self, o: Cdd) -> Cdd {
        let n = o.norm_sqr();
        let p = self.mul(Cdd(o.0, -o.1));
        Cdd(dd_div(p.0, n), dd_div(p.1, n))
    }
}

/// Gaussian elimination with partial pivoting; consumes `m`.
fn dense_det(m: &mut [Vec<Cdd>]) -> Cdd {
    let n = m.len();
    let mut det = Cdd(dd(1.0), dd(0.0));
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| m[a][k].norm_sqr().partial_cmp(&m[b][k].norm_sqr()).unwrap_or(Ordering::Equal))
            .unwrap_or(k);
        if m[p][k].norm_sqr() == dd(0.0) {
            return Cdd(dd(0.0), dd(0.0));
        }
        if p != k {
            m.swap(p, k);
            det = Cdd(-det.0, -det.1);
        }
        let pivot = m[k][k];
        det = det.mul(pivot);
        for i in k + 1..n {
            let f = m[i][k].div(pivot);
            if f.norm_sqr() == dd(0.0) {
                continue;
            }
            for j in k..n {
                let t = m[k][j];
                m[i][j] = m[i][j].sub(f.mul(t));
            }
        }
    }
    det
}

/// Sign of `t(x) − target` from an `f64` product with rescaling against overflow.
fn trace_offset_sign(bits: &[i8], v: f64, x: f64, target: f64) -> f64 {
    let (mut a, mut b, mut c, mut d) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut scaled = false;
    for &bit in bits {
        let y = x - v * bit as f64;
        let na = y * a - c;
        let nb = y * b - d;
        c = a;
        d = b;
        a = na;
        b = nb;
        if a.abs().max(b.abs()) > 1e150 {
            a *= 1e-150;
            b *= 1e-150;
            c *= 1e-150;
            d *= 1e-150;
            scaled = true;
        }
    }
    if scaled {
        a + d
    } else {
        a + d - target
    }
}

/// Number of eigenvalues of `H_c(θ)` below `x`, for `cos θ = ±1`.
///
/// Inertia of `H − x`: the first column of the transfer product runs through
/// the leading minors `P_i = det(x − H_i)`, so the pivots of the leading
/// `(q−1)×(q−1)` block are `−P_i/P_{i−1}`; the last pivot follows from
/// `det(H − x) = (−1)^q (t(x) − 2cos θ)`.
fn count_below(bits: &[i8], v: f64, x: f64, cos_theta: f64) -> usize {
    let q = bits.len();
    let target = 2.0 * cos_theta;
    let (mut a, mut b, mut c, mut d) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut scaled = false;
    let mut neg = 0;
    let mut det_sign = 1.0;
    for (i, &bit) in bits.iter().enumerate() {
        let y = x - v * bit as f64;
        let mut na = y * a - c;
        let nb = y * b - d;
        if i + 1 < q {
            if na == 0.0 {
                na = f64::MIN_POSITIVE.sqrt().copysign(a);
            }
            if (na > 0.0) == (a > 0.0) {
                neg += 1;
                det_sign = -det_sign;
            }
        }
        c = a;
        d = b;
        a = na;
        b = nb;
        if a.abs().max(b.abs()).max(c.abs()) > 1e150 {
            a *= 1e-150;
            b *= 1e-150;
            c *= 1e-150;
            d *= 1e-150;
            scaled = true;
        }
    }
    let offset = if scaled { a + d } else { a + d - target };
    let full = offset * if q % 2 == 0 { 1.0 } else { -1.0 };
    if full * det_sign < 0.0 {
        neg += 1;
    }
    neg
}

/// Width below which a bracket holding one eigenvalue is handed to the
/// double-double refinement.
const BRACKET_WIDTH: f64 = 1e-9;

fn isolate(bits: &[i8], v: f64, cos_theta: f64, a: f64, ca: usize, b: f64, cb: usize, out: &mut Vec<(f64, f64)>) {
    if cb <= ca {
        return;
    }
    if cb - ca == 1 {
        out.push(shrink(bits, v, 2.0 * cos_theta, a, b));
        return;
    }
    let mid = 0.5 * (a + b);
    if mid <= a || mid >= b || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
        out.extend(std::iter::repeat_n((mid, mid), cb - ca));
        return;
    }
    let cm = count_below(bits, v, mid, cos_theta);
    isolate(bits, v, cos_theta, a, ca, mid, cm.clamp(ca, cb), out);
    isolate(bits, v, cos_theta, mid, cm.clamp(ca, cb), b, cb, out);
}

/// Bisection on the sign of `t − target` over a bracket holding one root.
fn shrink(bits: &[i8], v: f64, target: f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let sa = trace_offset_sign(bits, v, a, target).signum();
    if sa == 0.0 || sa == trace_offset_sign(bits, v, b, target).signum() {
        return (a, b);
    }
    while b - a > BRACKET_WIDTH * a.abs().max(b.abs()).max(1.0) {
        let mid = 0.5 * (a + b);
        if trace_offset_sign(bits, v, mid, target).signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a, b)
}

/// Brackets of the eigenvalues of `H_c(θ)` for `cos θ = ±1`, ascending; a
/// degenerate bracket `(x, x)` marks an unresolved cluster.
fn bloch_brackets(bits: &[i8], v: f64, cos_theta: f64) -> Vec<(f64, f64)> {
    let lo = bits.iter().map(|&b| v * b as f64).fold(0.0f64, f64::min) - 3.0;
    let hi = bits.iter().map(|&b| v * b as f64).fold(0.0f64, f64::max) + 3.0;
    let mut out = Vec::with_capacity(bits.len());
    isolate(bits, v, cos_theta, lo, 0, hi, bits.len(), &mut out);
    out
}

/// Polishes a root of `t(E) = target` near `x0` to double-double accuracy.
fn polish_root(disc: &Discriminant, target: f64, x0: f64) -> Result<TwoFloat> {
    let f = |x: &TwoFloat| -> TwoFloat { disc.eval(x) - dd(target) };
    let sgn = |y: TwoFloat| y.hi().signum();
    let mut h = 8.0 * f64::EPSILON * x0.abs().max(1.0);
    let (mut a, mut b) = (dd(x0 - h), dd(x0 + h));
    let (mut fa, mut fb) = (f(&a), f(&b));
    let mut tries = 0;
    while sgn(fa) == sgn(fb) && fa.hi() != 0.0 && fb.hi() != 0.0 {
        tries += 1;
        if tries > 40 {
            return Err(Error::NoSignChange(x0 - h, x0 + h));
        }
        h *= 4.0;
        a = dd(x0 - h);
        b = dd(x0 + h);
        fa = f(&a);
        fb = f(&b);
    }
    refine_bracketed(disc, target, a, b)
}

/// `t(x)` in double-double with `t'(x)` alongside in `f64`.
fn newton_eval(disc: &Discriminant, x: TwoFloat) -> (TwoFloat, f64) {
    let Some(bits) = disc.bits() else {
        return (dd(2.0), 0.0);
    };
    let v = disc.coupling();
    let xs = [x + dd(v), x, x - dd(v)];
    let xf = xs.map(|y| y.hi());
    let (mut a, mut b, mut c, mut d) = (dd(1.0), dd(0.0), dd(0.0), dd(1.0));
    let (mut da, mut db, mut dc, mut dd_) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &bit in bits {
        let i = (bit + 1) as usize;
        let (y, yf) = (xs[i], xf[i]);
        let nda = a.hi() + yf * da - dc;
        let ndb = b.hi() + yf * db - dd_;
        dc = da;
        dd_ = db;
        da = nda;
        db = ndb;
        let na = y * a - c;
        let nb = y * b - d;
        c = a;
        d = b;
        a = na;
        b = nb;
    }
    (a + d, da + dd_)
}

/// Safeguarded Newton iteration in double-double on a sign-changing bracket.
fn refine_bracketed(disc: &Discriminant, target: f64, mut a: TwoFloat, mut b: TwoFloat) -> Result<TwoFloat> {
    let fa0 = disc.eval(&a) - dd(target);
    if fa0.hi() == 0.0 {
        return Ok(a);
    }
    let sa = fa0.hi().signum();
    let mut x = (a + b) * dd(0.5);
    let mut prev_moved = f64::INFINITY;
    for _ in 0..200 {
        let (t, dt) = newton_eval(disc, x);
        let fx = t - dd(target);
        if fx.hi() == 0.0 {
            return Ok(x);
        }
        if fx.hi().signum() == sa {
            a = x;
        } else {
            b = x;
        }
        let step = fx.hi() / dt;
        let mut next = x - dd(step);
        let inside = (next - a).hi() * (next - b).hi() < 0.0;
        if !step.is_finite() || !inside {
            next = (a + b) * dd(0.5);
        }
        let moved = (next - x).to_f64().abs();
        x = next;
        let scale = x.to_f64().abs().max(1.0);
        let quadratic = moved <= 1e-14 * scale && moved <= 1e-3 * prev_moved;
        let stalled = moved <= 1e-20 * scale && moved >= 0.25 * prev_moved;
        if quadratic || stalled || moved <= 1e-31 * scale || (b - a).to_f64().abs() <= 1e-31 * scale {
            return Ok(x);
        }
        prev_moved = moved;
    }
    Ok(x)
}

/// Edge of a band inside a bracket on which `t_c ∓ 2` changes sign.
pub fn refine_edge(c: &CfWord, v: f64, lo: f64, hi: f64) -> Result<TwoFloat> {
    let disc = Discriminant::new(c, v)?;
    for target in [2.0, -2.0] {
        let fl = disc.eval(&dd(lo)) - dd(target);
        let fh = disc.eval(&dd(hi)) - dd(target);
        if fl.hi() * fh.hi() <= 0.0 {
            return refine_bracketed(&disc, target, dd(lo), dd(hi));
        }
    }
    Err(Error::NoSignChange(lo, hi))
}

/// Band edges of `σ_c(V)` from the bits of one period.
fn edges_from_bits(bits: &[i8], v: f64) -> Result<Vec<(TwoFloat, TwoFloat, i8)>> {
    if v == 0.0 {
        return Err(Error::DegenerateSpectrum("V = 0".into()));
    }
    let disc = Discriminant::from_bits(bits.to_vec(), v);
    let mut roots: Vec<(TwoFloat, i8)> = Vec::with_capacity(2 * bits.len());
    for (cos, label) in [(1.0, 1i8), (-1.0, -1i8)] {
        for (a, b) in bloch_brackets(bits, v, cos) {
            let root = if a < b { refine_bracketed(&disc, 2.0 * cos, dd(a), dd(b))? } else { polish_root(&disc, 2.0 * cos, a)? };
            roots.push((root, label));
        }
    }
    roots.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let mut out = Vec::with_capacity(bits.len());
    for (j, pair) in roots.chunks(2).enumerate() {
        let ((lo, l1), (hi, l2)) = (pair[0], pair[1]);
        if l1 == l2 || !(lo < hi) {
            return Err(Error::DegenerateSpectrum(format!("band {j} has edges {} and {}", lo.to_f64(), hi.to_f64())));
        }
        if let Some(&(_, prev_hi, _)) = out.last() {
            if !(prev_hi < lo) {
                return Err(Error::DegenerateSpectrum(format!("bands {} and {j} touch", j - 1)));
            }
        }
        out.push((lo, hi, if l2 == 1 { 1 } else { -1 }));
    }
    Ok(out)
}

fn bands_of(c: &CfWord, edges: &[(TwoFloat, TwoFloat, i8)]) -> Vec<Band> {
    edges
        .iter()
        .enumerate()
        .map(|(index, &(lo, hi, slope))| Band { lo, hi, owner: c.clone(), index, slope, btype: BandType::Unclassified })
        .collect()
}

/// The `q` bands of `σ_c(V)` in ascending order.
pub fn band_edges(c: &CfWord, v: f64) -> Result<Vec<Band>> {
    let bits = period_bits(c)?.ok_or_else(|| Error::InfiniteSlope(c.to_string()))?;
    Ok(bands_of(c, &edges_from_bits(&bits, v)?))
}

/// `max(||t_c(lo)| − 2|, ||t_c(hi)| − 2|)` evaluated in double-double.
pub fn edge_residual(band: &Band, v: f64) -> Result<f64> {
    let disc = Discriminant::new(&band.owner, v)?;
    let r = |x: &TwoFloat| {
        let t: TwoFloat = disc.eval(x);
        (t.to_f64().abs() - 2.0).abs().max(((if t.hi() < 0.0 { -t } else { t }) - dd(2.0)).to_f64().abs())
    };
    Ok(r(&band.lo).max(r(&band.hi)))
}

/// Outcome of a backward classification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub btype: BandType,
    /// Strict-inclusion margin in the chosen spectrum, and distance from weak
    /// inclusion in the other one; the smaller of the two.
    pub margin: f64,
}

/// Spectra at one coupling, memoized by the value `φ(c)`.
#[derive(Clone, Debug)]
pub struct Spectra {
    v: f64,
    cache: HashMap<Rational, Option<Vec<(TwoFloat, TwoFloat, i8)>>>,
    words: HashMap<CfWord, Spectrum>,
}

impl Spectra {
    pub fn new(v: f64) -> Self {
        Spectra { v, cache: HashMap::new(), words: HashMap::new() }
    }

    pub fn coupling(&self) -> f64 {
        self.v
    }

    pub fn spectrum(&mut self, c: &CfWord) -> Result<Spectrum> {
        if let Some(s) = self.words.get(c) {
            return Ok(s.clone());
        }
        let key = c.evaluate();
        if !self.cache.contains_key(&key) {
            let edges = match period_bits(c)? {
                None => None,
                Some(bits) => Some(edges_from_bits(&bits, self.v)?),
            };
            self.cache.insert(key.clone(), edges);
        }
        let spectrum = match &self.cache[&key] {
            None => Spectrum::Whole,
            Some(e) => Spectrum::Bands(Arc::new(bands_of(c, e))),
        };
        self.words.insert(c.clone(), spectrum.clone());
        Ok(spectrum)
    }

    pub fn bands(&mut self, c: &CfWord) -> Result<Vec<Band>> {
        match self.spectrum(c)? {
            Spectrum::Whole => Err(Error::InfiniteSlope(c.to_string())),
            Spectrum::Bands(b) => Ok(b.to_vec()),
        }
    }

    /// Backward type of a band of `σ_c`, against `σ_{[c,0]}` and `σ_{[c,−1]}`.
    pub fn classify(&mut self, band: &Band) -> Result<Classification> {
        let c = &band.owner;
        let sa = self.spectrum(&c.extend(0)?)?;
        let sb = self.spectrum(&c.extend(-1)?)?;
        classify_against(band, &sa, &sb)
    }

    /// Bands of `σ_c` with their backward types.
    pub fn typed_bands(&mut self, c: &CfWord) -> Result<Vec<Band>> {
        let mut bands = self.bands(c)?;
        let sa = self.spectrum(&c.extend(0)?)?;
        let sb = self.spectrum(&c.extend(-1)?)?;
        for b in &mut bands {
            b.btype = classify_against(b, &sa, &sb)?.btype;
        }
        Ok(bands)
    }

    /// `σ_c ∩ σ_{[c,m]} ∩ σ_{[c,m−1]} = ∅`, with the separation margin.
    pub fn three_intersection(&mut self, c: &CfWord, m: i64) -> Result<IntersectionReport> {
        let s0 = self.spectrum(c)?;
        let s1 = self.spectrum(&c.extend(m)?)?;
        let s2 = self.spectrum(&c.extend(m - 1)?)?;
        let margin = triple_margin(&[&s0, &s1, &s2]);
        let scale = [&s0, &s1, &s2].iter().flat_map(|s| s.bands()).map(Band::scale).fold(1.0, f64::max);
        Ok(IntersectionReport { empty: margin > tolerance(scale), margin })
    }

    /// Forward structure of a typed band of `σ_c` for the extensions `[c,m]`
    /// and `[c,m,1], …, [c,m,n]`.
    pub fn forward_structure(&mut self, band: &Band, m: i64, n: i64) -> Result<ForwardStructure> {
        let f = self.forward_structure_ungated(band, m, n)?;
        let tol = tolerance(band.scale());
        if f.margin <= tol {
            return Err(Error::StructureViolation(format!(
                "{} band {} (m={m}, n={n}): margin {:e} below tolerance {tol:e}",
                band.owner, band.index, f.margin
            )));
        }
        Ok(f)
    }

    /// As [`Spectra::forward_structure`], with the margin reported but not
    /// compared against the tolerance.
    pub fn forward_structure_ungated(&mut self, band: &Band, m: i64, n: i64) -> Result<ForwardStructure> {
        let fail = |why: String| Error::StructureViolation(format!("{} band {} (m={m}, n={n}): {why}", band.owner, band.index));
        if m < 1 || n < 1 {
            return Err(fail("m and n must be positive".into()));
        }
        let big_m = match band.btype {
            BandType::A => m - 1,
            BandType::B => m,
            BandType::Unclassified => return Err(fail("band is not classified".into())),
        } as usize;
        let c = &band.owner;
        let cm = c.extend(m)?;
        let mut margin = f64::INFINITY;

        // (A1): bands of σ_{[c,m]} strictly inside the band.
        let inner_a = self.spectrum(&cm)?.inside(band);
        if inner_a.len() != big_m {
            return Err(fail(format!("{} bands of {cm} inside, expected {big_m}", inner_a.len())));
        }
        for j in &inner_a {
            margin = margin.min(j.inclusion_margin(band));
        }
        // (A2): none of them weakly inside σ_{[c,m,−1]}.
        let s_minus = self.spectrum(&cm.extend(-1)?)?;
        for j in &inner_a {
            margin = margin.min(-s_minus.inclusion_margin(j));
        }

        // (B1)/(B2) along n' = 1..n.
        let mut chain: Vec<Band> = vec![band.clone(); big_m + 1];
        let s_back_a = self.spectrum(&cm)?;
        for np in 1..=n {
            let cmn = cm.extend(np)?;
            let cands = self.spectrum(&cmn)?;
            let mut next = Vec::with_capacity(chain.len());
            if np == 1 {
                let inside = cands.inside(band);
                if inside.len() != big_m + 1 {
                    return Err(fail(format!("{} bands of {cmn} inside, expected {}", inside.len(), big_m + 1)));
                }
                next = inside;
            } else {
                for parent in &chain {
                    let inside = cands.inside(parent);
                    if inside.len() != 1 {
                        return Err(fail(format!("{} bands of {cmn} inside band {} of the previous level", inside.len(), parent.index)));
                    }
                    next.push(inside.into_iter().next().expect("one"));
                }
            }
            for (child, parent) in next.iter().zip(&chain) {
                margin = margin.min(child.inclusion_margin(parent));
                // [c,m,n',0] has the value of [c,m].
                margin = margin.min(-s_back_a.inclusion_margin(child));
            }
            chain = next;
        }

        // (I_str) for the last level.
        let mut seq: Vec<&Band> = Vec::with_capacity(2 * big_m + 1);
        for j in 0..=big_m {
            seq.push(&chain[j]);
            if j < big_m {
                seq.push(&inner_a[j]);
            }
        }
        for w in seq.windows(2) {
            margin = margin.min(w[0].separation(w[1]));
        }
        Ok(ForwardStructure { inner_a, inner_b: chain, margin })
    }

    /// The unique chain `I_{[c',n+1]} ⊂ I_{[c',n]}` above a band of `σ_{[c',1]}`
    /// of weak type B, up to `n_max`.
    pub fn tower(&mut self, start: &Band, n_max: i64) -> Result<Vec<Band>> {
        let parent_word = start.owner.parent().ok_or_else(|| Error::StructureViolation("tower needs [c',1]".into()))?;
        if start.owner.last() != 1 {
            return Err(Error::StructureViolation(format!("{} does not end in 1", start.owner)));
        }
        let mut chain = vec![start.clone()];
        for n in 2..=n_max {
            let w = parent_word.extend(n)?;
            let prev = chain.last().expect("non-empty");
            let inside: Vec<Band> = self.bands(&w)?.into_iter().filter(|j| j.inclusion_margin(prev) > tolerance(prev.scale())).collect();
            if inside.len() != 1 {
                return Err(Error::StructureViolation(format!("{} bands of {w} inside band {} of {}", inside.len(), prev.index, prev.owner)));
            }
            chain.push(inside.into_iter().next().expect("one"));
        }
        Ok(chain)
    }

    /// `Λ_k = σ_{c_k} ∪ σ_{[c_k,1]}` as merged intervals.
    pub fn lambda(&mut self, stream: &CfStream, k: usize) -> Result<Vec<(TwoFloat, TwoFloat)>> {
        let ck = stream.word(k);
        let mut iv: Vec<(TwoFloat, TwoFloat)> = self.bands(&ck)?.iter().map(|b| (b.lo, b.hi)).collect();
        iv.extend(self.bands(&ck.extend(1)?)?.iter().map(|b| (b.lo, b.hi)));
        iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(TwoFloat, TwoFloat)> = Vec::with_capacity(iv.len());
        for (lo, hi) in iv {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        Ok(merged)
    }

    /// Checks `Λ_{k+1} ⊆ Λ_k` and reports both measures.
    pub fn cover_check(&mut self, stream: &CfStream, k: usize) -> Result<CoverReport> {
        let outer = self.lambda(stream, k)?;
        let inner = self.lambda(stream, k + 1)?;
        let mut margin = f64::INFINITY;
        for &(lo, hi) in &inner {
            let best = outer
                .iter()
                .map(|&(a, b)| (lo - a).to_f64().min((b - hi).to_f64()))
                .fold(f64::NEG_INFINITY, f64::max);
            margin = margin.min(best);
        }
        let measure = |iv: &[(TwoFloat, TwoFloat)]| iv.iter().map(|&(a, b)| (b - a).to_f64()).sum::<f64>();
        let report = CoverReport { k, margin, measure_k: measure(&outer), measure_next: measure(&inner) };
        let scale = outer.iter().map(|&(a, b)| a.to_f64().abs().max(b.to_f64().abs())).fold(1.0, f64::max);
        if margin < -tolerance(scale) {
            return Err(Error::CoverViolation(format!("Λ_{} leaves Λ_{k} by {:e}", k + 1, -margin)));
        }
        Ok(report)
    }
}

fn classify_against(band: &Band, sa: &Spectrum, sb: &Spectrum) -> Result<Classification> {
    let tol = tolerance(band.scale());
    let ma = sa.inclusion_margin(band);
    let mb = sb.inclusion_margin(band);
    match (ma > tol, mb > tol) {
        (true, false) if mb < 0.0 => Ok(Classification { btype: BandType::A, margin: ma.min(-mb) }),
        (false, true) if ma < 0.0 => Ok(Classification { btype: BandType::B, margin: mb.min(-ma) }),
        _ => Err(Error::TypeAmbiguous(format!(
            "{} band {}: margins {ma:e} in [c,0] and {mb:e} in [c,-1]",
            band.owner, band.index
        ))),
    }
}

/// Smallest `max(lo) − min(hi)` over triples of bands, one from each spectrum;
/// positive iff the three spectra have no common point.
fn triple_margin(specs: &[&Spectrum; 3]) -> f64 {
    let sets: Vec<Vec<(f64, f64)>> = specs
        .iter()
        .map(|s| match s {
            Spectrum::Whole => vec![(f64::NEG_INFINITY, f64::INFINITY)],
            Spectrum::Bands(b) => b.iter().map(|x| (x.lo_f64(), x.hi_f64())).collect(),
        })
        .collect();
    let mut best = f64::INFINITY;
    for &(alo, ahi) in &sets[0] {
        for &(blo, bhi) in near(&sets[1], alo, ahi, best) {
            let (plo, phi) = (alo.max(blo), ahi.min(bhi));
            for &(clo, chi) in near(&sets[2], alo.min(blo), ahi.max(bhi), best) {
                let lo = plo.max(clo);
                let hi = phi.min(chi);
                best = best.min(lo - hi);
            }
        }
    }
    best
}

/// Sorted disjoint intervals within distance `reach` of `[lo, hi]`.
fn near(set: &[(f64, f64)], lo: f64, hi: f64, reach: f64) -> &[(f64, f64)] {
    let reach = if reach.is_finite() { reach.max(0.0) } else { f64::INFINITY };
    let start = set.partition_point(|&(_, h)| h < lo - reach);
    let end = set.partition_point(|&(l, _)| l <= hi + reach);
    &set[start..end.max(start)]
}

/// Outcome of a three-spectra intersection test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntersectionReport {
    pub empty: bool,
    pub margin: f64,
}

/// Bands found inside a parent band by [`Spectra::forward_structure`].
#[derive(Clone, Debug)]
pub struct ForwardStructure {
    /// The `M` bands of `σ_{[c,m]}`.
    pub inner_a: Vec<Band>,
    /// The `M+1` bands of `σ_{[c,m,n]}`.
    pub inner_b: Vec<Band>,
    /// Smallest inclusion, exclusion or separation margin met.
    pub margin: f64,
}

/// Outcome of `Λ_{k+1} ⊆ Λ_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverReport {
    pub k: usize,
    pub margin: f64,
    pub measure_k: f64,
    pub measure_next: f64,
}

/// Backward type of a band against fresh spectra of `[c,0]` and `[c,−1]`.
pub fn classify_backward(band: &Band, v: f64) -> Result<Classification> {
    Spectra::new(v).classify(band)
}

pub fn three_intersection_check(c: &CfWord, m: i64, v: f64) -> Result<IntersectionReport> {
    Spectra::new(v).three_intersection(c, m)
}

pub fn forward_structure(band: &Band, m: i64, n: i64, v: f64) -> Result<ForwardStructure> {
    Spectra::new(v).forward_structure(band, m, n)
}

pub fn spectrum_cover_check(stream: &CfStream, k: usize, v: f64) -> Result<CoverReport> {
    Spectra::new(v).cover_check(stream, k)
}
