use sturmian::cf::{cf_of_rational, cf_of_real, CfStream, CfWord, Rational};
use sturmian::num::parse_rational;

use crate::report::CliError;

fn entries(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| CliError::arg(format!("bad entry {t:?} in {s:?}"))))
        .collect()
}

fn positive(s: &str) -> Result<Vec<u64>, CliError> {
    entries(s)?
        .into_iter()
        .map(|c| u64::try_from(c).ok().filter(|&c| c >= 1).ok_or_else(|| CliError::arg(format!("entries of {s:?} must be positive"))))
        .collect()
}

/// A word from `--cf` (full entries `0,0,c_1,…`) or `--alpha` (`p/q`, or a
/// decimal expanded to `k` entries).
pub fn word(cf: Option<&str>, alpha: Option<&str>, k: Option<usize>) -> Result<CfWord, CliError> {
    match (cf, alpha) {
        (Some(cf), None) => Ok(CfWord::new(entries(cf)?)?),
        (None, Some(a)) if a.contains('/') => {
            let r = parse_rational(a).ok_or_else(|| CliError::arg(format!("bad fraction {a:?}")))?;
            let r = Rational::new(r.numer().clone(), r.denom().clone());
            if !r.in_unit_interval() {
                return Err(CliError::arg(format!("alpha {a} must lie in [0, 1]")));
            }
            let tail: Vec<i64> = cf_of_rational(r.numer(), r.denom()).into_iter().map(|c| c as i64).collect();
            Ok(CfWord::from_tail(&tail)?)
        }
        (None, Some(a)) => {
            let x: f64 = a.parse().map_err(|_| CliError::arg(format!("bad alpha {a:?}")))?;
            let k = k.ok_or_else(|| CliError::arg("a decimal alpha needs --k"))?;
            let tail: Vec<i64> = cf_of_real(x, k)?.into_iter().map(|c| c as i64).collect();
            Ok(CfWord::from_tail(&tail)?)
        }
        _ => Err(CliError::arg("give exactly one of --cf and --alpha")),
    }
}

/// A stream from `--cf`: the period `c_1,…`, optionally after a prefix
/// separated by `;`, as in `3;1` for `[0; 3, 1, 1, 1, …]`.
pub fn stream(cf: &str) -> Result<CfStream, CliError> {
    match cf.split_once(';') {
        Some((pre, per)) => Ok(CfStream::new(positive(pre)?, positive(per)?)?),
        None => Ok(CfStream::periodic(positive(cf)?)?),
    }
}

/// `a..b` (inclusive) or a single integer.
pub fn range(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::arg(format!("bad range {s:?}; use a..b or an integer"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let x = s.trim().parse().map_err(|_| bad())?;
            (x, x)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn coupling(v: f64) -> Result<f64, CliError> {
    if !v.is_finite() || v == 0.0 {
        return Err(CliError::arg(format!("V = {v} is not a usable coupling")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_from_either_flag() {
        assert_eq!(word(Some("0,0,1"), None, None).unwrap().entries(), &[0, 0, 1]);
        assert_eq!(word(None, Some("5/13"), None).unwrap().entries(), &[0, 0, 2, 1, 1, 2]);
        assert_eq!(word(None, Some("0/1"), None).unwrap().entries(), &[0, 0]);
        assert_eq!(word(None, Some("0.6180339887498949"), Some(4)).unwrap().entries(), &[0, 0, 1, 1, 1, 1]);
        assert!(word(None, Some("3/2"), None).is_err());
        assert!(word(Some("0,0"), Some("1/2"), None).is_err());
    }

    #[test]
    fn streams_and_ranges() {
        assert_eq!(stream("1").unwrap(), CfStream::fibonacci());
        assert_eq!(stream("3;1").unwrap().entries(3), vec![3, 1, 1]);
        assert_eq!(range("-3..4").unwrap(), (-3, 4));
        assert_eq!(range("7").unwrap(), (7, 7));
        assert!(range("4..-3").is_err());
        assert!(stream("0,1").is_err());
    }
}
