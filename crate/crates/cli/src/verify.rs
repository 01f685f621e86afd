use clap::ValueEnum;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;

use sturmian::cf::{CfStream, CfWord};
use sturmian::coding::{code_of_mu, cumulative_s, enumerate_codes, extension_count, extension_count_brute, mu_of_code, CodeTree, Label};
use sturmian::ids::{decompose_label, gap_certificate_in, resum_label};
use sturmian::num::{Poly, Ring};
use sturmian::spectra::{charpoly_residual, edge_residual, Spectra};
use sturmian::traces::{cheb_poly, commutator_residual, fricke_vogt_residual, trace_step, Symbolic, TraceSource};
use sturmian::words::{check_last_bit, check_palindrome, check_prefixes, check_subperiod_shift, check_suffixes, period_chain, period_direct};
use sturmian::Error;

use crate::report::{cell, num, CliError, Report, SCHEMA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Cf,
    Words,
    Traces,
    Spectra,
    Coding,
    Ids,
    All,
}

/// Outcome of one named check, with its worst margin where one exists.
struct Check {
    suite: &'static str,
    name: &'static str,
    pass: bool,
    margin: Option<f64>,
    detail: String,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, suite: &'static str, name: &'static str, outcome: Outcome) {
        let c = match outcome {
            Ok((margin, detail)) => Check { suite, name, pass: margin.is_none_or(|m| m > 0.0), margin, detail },
            Err(detail) => Check { suite, name, pass: false, margin: None, detail },
        };
        self.0.push(c);
    }
}

type Outcome = Result<(Option<f64>, String), String>;

fn lib<T>(r: Result<T, Error>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn streams() -> Vec<CfStream> {
    vec![CfStream::fibonacci(), CfStream::periodic(vec![2, 1, 1, 2]).expect("valid"), CfStream::periodic(vec![1, 3]).expect("valid")]
}

fn cf_checks(out: &mut Checks) {
    out.push("cf", "convergent determinants", (|| -> Outcome {
        for s in streams() {
            let conv = s.convergents(30);
            for w in conv.windows(2) {
                let det = &w[1].0 * &w[0].1 - &w[0].0 * &w[1].1;
                if det != BigInt::from(1) && det != BigInt::from(-1) {
                    return Err(format!("{s}: p_k q_(k-1) - p_(k-1) q_k = {det}"));
                }
            }
        }
        Ok((None, "|p_k q_(k-1) - p_(k-1) q_k| = 1 for k <= 30 on 3 streams".into()))
    })());
    out.push("cf", "words evaluate to convergents", (|| -> Outcome {
        for s in streams() {
            let conv = s.convergents(20);
            for k in 0..=20 {
                let v = s.word(k).evaluate();
                let (p, q) = &conv[k + 1];
                if v.numer() != p || v.denom() != q {
                    return Err(format!("{s}: word {k} evaluates to {}/{}", v.numer(), v.denom()));
                }
            }
        }
        Ok((None, "phi(c_k) = p_k/q_k for k <= 20".into()))
    })());
}

fn words_checks(out: &mut Checks) {
    out.push("words", "recursion and word properties", (|| -> Outcome {
        for s in streams() {
            let ws = lib(period_chain(&s.entries(12), 12))?;
            for k in 0..=12 {
                if ws[k] != lib(period_direct(&s.word(k)))? {
                    return Err(format!("{s}: recursive and direct periods differ at k = {k}"));
                }
                let checks = [
                    (k >= 2).then(|| check_prefixes(&ws, k)),
                    (k >= 2).then(|| check_suffixes(&ws, k)),
                    (k >= 2).then(|| check_subperiod_shift(&ws, k)),
                    (k >= 1).then(|| check_palindrome(&ws[k])),
                    (k >= 1).then(|| check_last_bit(&ws[k])),
                ];
                if let Some((name, i)) = checks.into_iter().flatten().find_map(|c| c.err()) {
                    return Err(format!("{s}: W_{k} violates {name} at {i}"));
                }
            }
        }
        Ok((None, "3 streams, k <= 12".into()))
    })());
}

fn traces_checks(out: &mut Checks) {
    out.push("traces", "exact trace identities", (|| -> Outcome {
        let src = Symbolic { v: BigRational::new(9.into(), 2.into()) };
        let mut n = 0;
        for tail in [vec![], vec![1], vec![2], vec![1, 2], vec![2, 1, 1]] {
            let c = lib(CfWord::from_tail(&tail))?;
            let t = |w: &CfWord| lib(src.trace(w));
            for m in 0..=2i64 {
                let step = trace_step(&t(&c)?, &t(&lib(c.extend(m))?)?, &t(&lib(c.extend(m - 1))?)?);
                if step != t(&lib(c.extend(m + 1))?)? {
                    return Err(format!("trace recursion fails at {c}, m = {m}"));
                }
                if !lib(fricke_vogt_residual(&src, &c, m))?.is_zero() {
                    return Err(format!("Fricke-Vogt fails at {c}, m = {m}"));
                }
                n += 2;
            }
            for (m, k) in [(1, 1), (1, 2), (2, -1)] {
                if !lib(commutator_residual(&src, &c, m, k))?.is_zero() {
                    return Err(format!("commutator identity fails at {c}, ({m}, {k})"));
                }
                n += 1;
            }
        }
        Ok((None, format!("{n} polynomial identities exactly zero at V = 9/2")))
    })());
    out.push("traces", "Chebyshev Cassini identity", (|| -> Outcome {
        for n in 1..=100 {
            let s = |n: i64| cheb_poly::<BigInt>(n);
            if s(n + 1) * s(n - 1) - s(n) * s(n) != Poly::constant(BigInt::from(-1)) {
                return Err(format!("S_(n+1) S_(n-1) - S_n^2 != -1 at n = {n}"));
            }
        }
        Ok((None, "S_(n+1) S_(n-1) - S_n^2 = -1 for n <= 100".into()))
    })());
}

fn spectra_checks(out: &mut Checks) {
    let words: Vec<CfWord> = [vec![1], vec![2, 1], vec![1, 1, 2], vec![2, 1, 1, 2], vec![3, 2, 1]]
        .iter()
        .map(|t| CfWord::from_tail(t).expect("valid"))
        .collect();
    let v = 5.0;
    let mut sp = Spectra::new(v);
    out.push("spectra", "bands and edges", (|| -> Outcome {
        let mut worst = 0.0f64;
        for c in &words {
            for b in lib(sp.typed_bands(c))? {
                worst = worst.max(lib(edge_residual(&b, v))?);
            }
        }
        Ok((Some(1e-9 - worst), format!("max ||t(edge)| - 2| = {worst:.2e} over 5 words, V = 5")))
    })());
    out.push("spectra", "three consecutive spectra", (|| -> Outcome {
        let mut margin = f64::INFINITY;
        for c in &words {
            for m in 0..=3 {
                margin = margin.min(lib(sp.three_intersection(c, m))?.margin);
            }
        }
        Ok((Some(margin), format!("min separation {margin:.3e}")))
    })());
    out.push("spectra", "forward structure", (|| -> Outcome {
        let mut margin = f64::INFINITY;
        for c in &words {
            for b in lib(sp.typed_bands(c))? {
                for (m, n) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
                    margin = margin.min(lib(sp.forward_structure(&b, m, n))?.margin);
                }
            }
        }
        Ok((Some(margin), format!("min interlacing margin {margin:.3e}")))
    })());
    out.push("spectra", "Bloch determinant", (|| -> Outcome {
        let mut worst = 0.0f64;
        for c in &words {
            for b in lib(sp.bands(c))? {
                for (i, theta) in [0.3, 1.1, 2.0, 2.9].into_iter().enumerate() {
                    let e = b.lo_f64() + (b.hi_f64() - b.lo_f64()) * (i as f64 + 0.5) / 4.0;
                    worst = worst.max(lib(charpoly_residual(c, v, theta, e))?);
                }
            }
        }
        Ok((Some(1e-8 - worst), format!("max |det(E - H) - (t - 2cos theta)| = {worst:.2e}")))
    })());
}

fn coding_checks(out: &mut Checks) {
    out.push("coding", "counting matrices", (|| -> Outcome {
        let mut n = 0;
        for entries in [vec![2, 1, 1, 2], vec![1, 3, 2], vec![3, 1, 1, 1, 2]] {
            lib(cumulative_s(&entries))?;
            for j in 0..=entries.len() {
                for label in [Label::G, Label::A] {
                    if let Some(brute) = extension_count_brute(&entries, j, label) {
                        let fast = lib(extension_count(&entries, j, label))?;
                        if fast != BigInt::from(brute) {
                            return Err(format!("{entries:?} j = {j}: {fast} vs {brute}"));
                        }
                        n += 1;
                    }
                }
            }
        }
        Ok((None, format!("{n} extension counts agree with enumeration")))
    })());
    out.push("coding", "mu determines the code", (|| -> Outcome {
        let entries = [2, 1, 1, 2, 1];
        let codes = lib(enumerate_codes(&entries, false))?;
        for c in &codes {
            let mu = lib(mu_of_code(c, &entries))?;
            if lib(code_of_mu(&mu, &entries))? != c.prefix(c.depth() - 1) {
                return Err(format!("{c}: mu {mu} does not return the code"));
            }
        }
        Ok((None, format!("{} codes round-trip", codes.len())))
    })());
}

fn ids_checks(out: &mut Checks) {
    out.push("ids", "labels re-sum", (|| -> Outcome {
        for s in streams() {
            let conv = s.convergents(30);
            for ell in -200..=200 {
                let mu = lib(decompose_label(ell, &conv))?;
                if lib(resum_label(&mu, &conv))? != BigInt::from(ell) {
                    return Err(format!("{s}: l = {ell}"));
                }
            }
        }
        Ok((None, "|l| <= 200 on 3 streams".into()))
    })());
    out.push("ids", "gap certificates", (|| -> Outcome {
        let s = CfStream::fibonacci();
        let mut sp = Spectra::new(5.0);
        let tree = lib(CodeTree::build(&mut sp, &s.entries(8), 8))?;
        let mut width = f64::INFINITY;
        for ell in -6..=6 {
            let c = lib(gap_certificate_in(&tree, &mut sp, &s, ell))?;
            width = width.min(c.gap.1 - c.gap.0);
        }
        Ok((Some(width), format!("|l| <= 6 certified at depth 8, min gap {width:.3e}")))
    })());
}

pub fn run(suite: Suite) -> Result<Report, CliError> {
    let mut out = Checks::default();
    let all = suite == Suite::All;
    if all || suite == Suite::Cf {
        cf_checks(&mut out);
    }
    if all || suite == Suite::Words {
        words_checks(&mut out);
    }
    if all || suite == Suite::Traces {
        traces_checks(&mut out);
    }
    if all || suite == Suite::Spectra {
        spectra_checks(&mut out);
    }
    if all || suite == Suite::Coding {
        coding_checks(&mut out);
    }
    if all || suite == Suite::Ids {
        ids_checks(&mut out);
    }
    let checks: Vec<Check> = out.0;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let list: Vec<_> = checks
        .iter()
        .map(|c| json!({ "suite": c.suite, "name": c.name, "pass": c.pass, "margin": c.margin.map(num), "detail": c.detail }))
        .collect();
    let rows = checks
        .iter()
        .map(|c| vec![c.suite.to_string(), c.name.to_string(), c.pass.to_string(), c.margin.map(cell).unwrap_or_default(), c.detail.clone()])
        .collect();
    Ok(Report {
        json: json!({ "schema": SCHEMA, "suite": format!("{suite:?}").to_lowercase(), "passed": checks.len() - failed, "failed": failed, "checks": list }),
        header: vec!["suite", "name", "pass", "margin", "detail"],
        rows,
        failed: failed > 0,
    })
}
