//! Integrated density of states `N_{α,V}` for `V > 4`: by counting bands of
//! the approximants, by the series `Σ (−1)^k μ_k(γ) (q_k α − p_k)` over a code,
//! and the finite-depth certification that every label `ℓα mod 1` is the IDS
//! value of an open gap.
//!
//! Coefficients are `μ_k`; the related `π_k` differ only at `k = 0`, by one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::cf::CfStream;
use crate::coding::{code_of_mu, mu_of_code, Code, CodeTree, MuSeq};
use crate::error::{Error, Result};
use crate::spectra::{tolerance, Spectra};

/// A truncated IDS series: the true value lies in `[value, value + residual_bound]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdsValue {
    pub value: f64,
    /// Last index `k` summed.
    pub k_used: i64,
    pub residual_bound: f64,
}

/// `#{bands of σ_{c_k}(V) strictly left of E} / q_k`.
pub fn ids_by_band_counting(spectra: &mut Spectra, stream: &CfStream, e: f64, k: usize) -> Result<BigRational> {
    let bands = spectra.bands(&stream.word(k))?;
    let tol = tolerance(e);
    let mut left = 0u64;
    for b in &bands {
        if (b.lo_f64() - e).abs() <= tol || (b.hi_f64() - e).abs() <= tol {
            return Err(Error::EdgeCollision(e));
        }
        if b.hi_f64() < e {
            left += 1;
        }
    }
    Ok(BigRational::new(BigInt::from(left), BigInt::from(bands.len())))
}

/// `Σ_{j=−1}^{K} (−1)^j μ_j (q_j α − p_j)` over the stored coefficients.
pub fn ids_series(mu: &MuSeq, stream: &CfStream) -> f64 {
    (-1..=mu.last_index())
        .map(|j| {
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sign * mu.get(j) as f64 * stream.delta(j)
        })
        .sum()
}

/// IDS at `E_{α,V}(γ)` from a code prefix of depth `K ≥ 1`: the series through
/// `μ_{K−1}`, with the tail bounded by `|q_{K−1}α − p_{K−1}| + |q_K α − p_K|`.
pub fn ids_by_code(code: &Code, stream: &CfStream) -> Result<IdsValue> {
    let k = code.depth();
    if k < 1 {
        return Err(Error::InsufficientDepth(format!("{code} has depth 0")));
    }
    let mu = mu_of_code(code, &stream.entries(k))?;
    let k = k as i64;
    Ok(IdsValue {
        value: ids_series(&mu, stream),
        k_used: k - 1,
        residual_bound: stream.delta(k - 1).abs() + stream.delta(k).abs(),
    })
}

/// Finitely supported `μ` with `Σ_j (−1)^j μ_j q_j = ℓ`, by the greedy
/// splitting of `ℓ` along the denominators.
pub fn decompose_label(ell: i64, conv: &[(BigInt, BigInt)]) -> Result<MuSeq> {
    let q = |j: i64| -> Result<i128> {
        conv.get((j + 1) as usize)
            .and_then(|(_, q)| q.to_i128())
            .ok_or_else(|| Error::InsufficientDepth(format!("label {ell} needs q_{j}")))
    };
    let mut mu: Vec<i64> = vec![0, 0];
    let set = |j: i64, v: i64, mu: &mut Vec<i64>| {
        let i = (j + 1) as usize;
        if mu.len() <= i {
            mu.resize(i + 1, 0);
        }
        mu[i] = v;
    };
    let mut l = ell as i128;
    loop {
        if l == -1 {
            set(-1, 1, &mut mu);
            set(0, -1, &mut mu);
            break;
        }
        if l >= 0 && l < q(1)? {
            set(0, l as i64, &mut mu);
            break;
        }
        if l > 0 {
            let mut m = 1;
            while q(2 * m + 1)? <= l {
                m += 1;
            }
            let (qa, qb) = (q(2 * m - 1)?, q(2 * m)?);
            let v = (l - qa).div_euclid(qb) + 1;
            set(2 * m, v as i64, &mut mu);
            l -= v * qb;
        } else {
            let mut m = 0;
            while l < -q(2 * m + 2)? {
                m += 1;
            }
            let (qa, qb) = (q(2 * m)?, q(2 * m + 1)?);
            let v = -((l + qa).div_euclid(qb));
            set(2 * m + 1, v as i64, &mut mu);
            l += v * qb;
        }
    }
    Ok(MuSeq::new(mu))
}

/// `Σ_j (−1)^j μ_j q_j` in exact arithmetic.
pub fn resum_label(mu: &MuSeq, conv: &[(BigInt, BigInt)]) -> Result<BigInt> {
    let mut s = BigInt::zero();
    for j in -1..=mu.last_index() {
        let (_, q) = conv.get((j + 1) as usize).ok_or_else(|| Error::InsufficientDepth(format!("q_{j}")))?;
        let t = q * mu.get(j);
        if j.rem_euclid(2) == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    Ok(s)
}

/// `b_V(γ|[0,d])` for `d = 0, …, depth(γ)`; the widths never increase.
pub fn energy_of_code(tree: &CodeTree, code: &Code) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(code.len());
    for d in 0..code.len() {
        let b = tree.band_of(&code.prefix(d))?;
        let iv = (b.lo_f64(), b.hi_f64());
        if let Some(&(lo, hi)) = out.last() {
            if iv.0 < lo || iv.1 > hi {
                return Err(Error::StructureViolation(format!("{} leaves the band of its prefix", code.prefix(d))));
            }
        }
        out.push(iv);
    }
    Ok(out)
}

/// `ℓα mod 1` in `[0, 1)`.
pub fn label_value(ell: i64, alpha: f64) -> f64 {
    (ell as f64 * alpha).rem_euclid(1.0)
}

/// Distance on `ℝ/ℤ`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// One side of a certified gap.
#[derive(Clone, Debug)]
pub struct GapSide {
    pub mu: MuSeq,
    pub code: Code,
    /// `b_V(γ|[0,k])`.
    pub band: (f64, f64),
    pub ids: IdsValue,
    /// `|IDS − ℓα mod 1|` on the circle.
    pub ids_error: f64,
}

/// A gap of `σ(H_{α,V})` with IDS value `ℓα mod 1`, certified at depth `k`.
#[derive(Clone, Debug)]
pub struct GapCertificate {
    pub ell: i64,
    pub label: f64,
    pub k: usize,
    /// Code side left of the gap; absent for `ℓ = 0`, where the gap is below
    /// the spectrum.
    pub left: Option<GapSide>,
    pub right: GapSide,
    /// The open gap between the two bands.
    pub gap: (f64, f64),
    /// Largest overlap of `Λ_k` with the gap; non-positive when certified.
    pub cover_overlap: f64,
}

fn side(tree: &CodeTree, stream: &CfStream, mu: MuSeq, ell: i64, entries: &[u64]) -> Result<GapSide> {
    let code = code_of_mu(&mu, entries)?;
    let b = tree.band_of(&code)?;
    let ids = ids_by_code(&code, stream)?;
    let label = label_value(ell, stream.alpha());
    let ids_error = circle_distance(ids.value, label);
    Ok(GapSide { mu, code, band: (b.lo_f64(), b.hi_f64()), ids, ids_error })
}

/// Builds the codes `γ` and `γ′` of the two gap edges for the label `ℓ` and
/// checks them at depth `k` on a prebuilt tree.
pub fn gap_certificate_in(tree: &CodeTree, spectra: &mut Spectra, stream: &CfStream, ell: i64) -> Result<GapCertificate> {
    let k = tree.depth();
    let fail = |why: String| Error::CertificateFailure(format!("ℓ = {ell}: {why}"));
    let entries = stream.entries(k + 1);
    let conv = stream.convergents(k + 1);
    let label = label_value(ell, stream.alpha());

    let (left, right) = if ell == 0 {
        let right = side(tree, stream, MuSeq::new(vec![0; k + 2]), ell, &entries)?;
        (None, right)
    } else {
        let mu = decompose_label(ell, &conv)?;
        if resum_label(&mu, &conv)? != BigInt::from(ell) {
            return Err(fail(format!("{mu} does not sum to ℓ")));
        }
        let k0 = mu.support_end().unwrap_or(0);
        if k0 + 2 > k as i64 {
            return Err(Error::InsufficientDepth(format!("ℓ = {ell} needs depth {}", k0 + 2)));
        }
        let mut mp = vec![0i64; k + 2];
        if ell == -1 {
            mp[1] = entries[0] as i64 - 1;
        } else {
            for j in -1..=k0 {
                mp[(j + 1) as usize] = mu.get(j);
            }
            mp[(k0 + 1) as usize] -= 1;
        }
        let start = if ell == -1 { 2 } else { k0 + 1 };
        for j in (start..=k as i64).step_by(2) {
            mp[(j + 1) as usize] = entries[j as usize] as i64;
        }
        let right = side(tree, stream, mu.resized(k as i64), ell, &entries)?;
        let left = side(tree, stream, MuSeq::new(mp), ell, &entries)?;
        (Some(left), right)
    };

    let gap_lo = left.as_ref().map_or(f64::NEG_INFINITY, |s| s.band.1);
    let gap_hi = right.band.0;
    if let Some(l) = &left {
        if l.code.cmp_order(&right.code) != std::cmp::Ordering::Less {
            return Err(fail(format!("{} does not precede {}", l.code, right.code)));
        }
        if gap_hi - gap_lo <= tolerance(gap_hi) {
            return Err(fail(format!("bands of {} and {} are not separated", l.code, right.code)));
        }
    }
    let mut overlap = f64::NEG_INFINITY;
    for (a, b) in spectra.lambda(stream, k)? {
        let (a, b) = (a.hi(), b.hi());
        overlap = overlap.max(b.min(gap_hi) - a.max(gap_lo));
    }
    if overlap > tolerance(gap_hi) {
        return Err(fail(format!("Λ_{k} meets the gap ({gap_lo}, {gap_hi}) over {overlap:e}")));
    }
    for s in left.iter().chain([&right]) {
        if s.ids_error > s.ids.residual_bound + 1e-8 {
            return Err(fail(format!("IDS {} ± {:e} of {} misses {label}", s.ids.value, s.ids.residual_bound, s.code)));
        }
    }
    Ok(GapCertificate { ell, label, k, left, right, gap: (gap_lo, gap_hi), cover_overlap: overlap })
}

/// [`gap_certificate_in`] on a fresh tree of depth `k_max`.
pub fn gap_certificate(ell: i64, stream: &CfStream, v: f64, k_max: usize) -> Result<GapCertificate> {
    let mut spectra = Spectra::new(v);
    let tree = CodeTree::build(&mut spectra, &stream.entries(k_max), k_max)?;
    gap_certificate_in(&tree, &mut spectra, stream, ell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_resum() {
        let fib = CfStream::fibonacci().convergents(30);
        assert_eq!(decompose_label(-1, &fib).unwrap().values(), &[1, -1]);
        let per = CfStream::periodic(vec![2, 1, 1, 2]).unwrap();
        let conv = per.convergents(30);
        assert_eq!(decompose_label(1, &conv).unwrap().values(), &[0, 1]);
        for ell in -60..=60 {
            for c in [&fib, &conv] {
                let mu = decompose_label(ell, c).unwrap();
                assert_eq!(resum_label(&mu, c).unwrap(), BigInt::from(ell), "{ell}");
            }
        }
        let mu = decompose_label(7, &fib).unwrap();
        assert_eq!(resum_label(&mu, &fib).unwrap(), BigInt::from(7));
    }

    #[test]
    fn series_values() {
        let s = CfStream::fibonacci();
        let a = s.alpha();
        assert!((ids_series(&MuSeq::new(vec![1, -1, 0, 0]), &s) - (1.0 - a)).abs() < 1e-15);
        assert_eq!(ids_series(&MuSeq::new(vec![0; 6]), &s), 0.0);
    }

    #[test]
    fn counting_example() {
        let s = CfStream::periodic(vec![2, 1, 1, 2]).unwrap();
        let mut sp = Spectra::new(5.0);
        let tree = CodeTree::build(&mut sp, &s.entries(4), 4).unwrap();
        let g: Code = "G2.B.G2.B.G2".parse().unwrap();
        let e = tree.band_of(&g).unwrap().mid();
        let n = ids_by_band_counting(&mut sp, &s, e, 4).unwrap();
        assert_eq!(n, BigRational::new(12.into(), 13.into()));
        assert_eq!(ids_by_band_counting(&mut sp, &s, -10.0, 4).unwrap(), BigRational::zero());
        assert_eq!(ids_by_band_counting(&mut sp, &s, 10.0, 4).unwrap(), BigRational::new(1.into(), 1.into()));
    }

    #[test]
    fn energies_nest() {
        let s = CfStream::fibonacci();
        let mut sp = Spectra::new(5.0);
        let tree = CodeTree::build(&mut sp, &s.entries(6), 6).unwrap();
        let g: Code = "G2".parse().unwrap();
        assert_eq!(energy_of_code(&tree, &g).unwrap(), vec![(3.0, 7.0)]);
        let leftmost = tree.level(6)[0].code.clone();
        let iv = energy_of_code(&tree, &leftmost).unwrap();
        assert!(iv.windows(2).all(|w| w[1].1 - w[1].0 <= w[0].1 - w[0].0));
    }

    #[test]
    fn small_certificates() {
        let s = CfStream::fibonacci();
        for ell in [-1, 0, 1, 2] {
            let c = gap_certificate(ell, &s, 5.0, 8).unwrap();
            assert!(c.gap.0 < c.gap.1);
        }
        let c = gap_certificate(-1, &s, 5.0, 8).unwrap();
        assert!((c.label - (1.0 - s.alpha())).abs() < 1e-15);
    }
}
