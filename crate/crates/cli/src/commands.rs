use rayon::prelude::*;
use serde_json::{json, Value};

use sturmian::cf::{cf_of_rational, CfStream, CfWord, Rational};
use sturmian::coding::{mu_of_code, Code, CodeTree};
use sturmian::ids::{energy_of_code, gap_certificate_in, ids_by_band_counting, ids_by_code, GapCertificate, GapSide};
use sturmian::spectra::{band_edges, Band, BandType, Spectra};
use sturmian::Error;

use crate::report::{cell, num, CliError, Report, SCHEMA};

pub const BUTTERFLY_QMAX: u64 = 512;

fn type_name(t: BandType) -> Value {
    match t {
        BandType::A => json!("A"),
        BandType::B => json!("B"),
        BandType::Unclassified => Value::Null,
    }
}

/// Bands of one word with their backward types; types stay unset for
/// `V ≤ 4`, where they need not exist.
pub fn spectrum(c: &CfWord, v: f64) -> Result<Report, CliError> {
    let mut sp = Spectra::new(v);
    let bands: Vec<Band> = if v > 4.0 { sp.typed_bands(c)? } else { sp.bands(c)? };
    let value = c.evaluate();
    let alpha = format!("{}/{}", value.numer(), value.denom());
    let rows = bands
        .iter()
        .map(|b| {
            let t = type_name(b.btype);
            vec![b.index.to_string(), cell(b.lo_f64()), cell(b.hi_f64()), t.as_str().unwrap_or("").to_string()]
        })
        .collect();
    let list: Vec<Value> =
        bands.iter().map(|b| json!({ "index": b.index, "lo": b.lo_f64(), "hi": b.hi_f64(), "type": type_name(b.btype) })).collect();
    Ok(Report {
        json: json!({
            "schema": SCHEMA,
            "word": c.entries(),
            "alpha": alpha,
            "V": v,
            "q": bands.len(),
            "measure": bands.iter().map(Band::width).sum::<f64>(),
            "bands": list,
        }),
        header: vec!["index", "lo", "hi", "type"],
        rows,
        failed: false,
    })
}

/// Reduced fractions in `[0, 1]` with denominator at most `n`, in Farey order.
pub fn farey(n: u64) -> Vec<(u64, u64)> {
    let mut out = vec![(0, 1)];
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    while c <= n {
        let k = (n + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
        out.push((a, b));
    }
    out
}

pub fn butterfly(v: f64, q_max: u64) -> Result<Report, CliError> {
    if !(1..=BUTTERFLY_QMAX).contains(&q_max) {
        return Err(CliError::arg(format!("--qmax must lie in 1..={BUTTERFLY_QMAX}")));
    }
    let fractions = farey(q_max);
    let per: Vec<Result<Vec<Band>, Error>> = fractions
        .par_iter()
        .map(|&(p, q)| {
            let r = Rational::new(p, q);
            let tail: Vec<i64> = cf_of_rational(r.numer(), r.denom()).into_iter().map(|c| c as i64).collect();
            band_edges(&CfWord::from_tail(&tail)?, v)
        })
        .collect();
    let mut rows = Vec::new();
    let mut list = Vec::new();
    for (&(p, q), bands) in fractions.iter().zip(per) {
        let alpha = p as f64 / q as f64;
        for b in bands? {
            rows.push(vec![cell(alpha), cell(v), cell(b.lo_f64()), cell(b.hi_f64())]);
            list.push(json!({ "p": p, "q": q, "alpha": alpha, "lo": b.lo_f64(), "hi": b.hi_f64() }));
        }
    }
    Ok(Report {
        json: json!({ "schema": SCHEMA, "V": v, "qmax": q_max, "fractions": fractions.len(), "rows": list }),
        header: vec!["alpha", "V", "lo", "hi"],
        rows,
        failed: false,
    })
}

/// IDS on an energy grid by band counting at level `k`.
pub fn ids_grid(stream: &CfStream, v: f64, k: usize, lo: f64, hi: f64, steps: usize) -> Result<Report, CliError> {
    if steps < 1 || !(lo <= hi) {
        return Err(CliError::arg("the grid needs --emin <= --emax and --steps >= 1"));
    }
    let mut sp = Spectra::new(v);
    let q = sp.bands(&stream.word(k))?.len();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut list = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let e = lo + (hi - lo) * i as f64 / steps as f64;
        match ids_by_band_counting(&mut sp, stream, e, k) {
            Ok(n) => {
                let count = n.numer() * q / n.denom();
                let value = count.to_string().parse::<f64>().expect("integer") / q as f64;
                rows.push(vec![cell(e), count.to_string(), q.to_string(), cell(value), String::new()]);
                list.push(json!({ "E": e, "count": count.to_string(), "q": q, "ids": value }));
            }
            Err(Error::EdgeCollision(_)) => {
                rows.push(vec![cell(e), String::new(), q.to_string(), String::new(), "edge".into()]);
                list.push(json!({ "E": e, "count": Value::Null, "q": q, "ids": Value::Null, "note": "edge" }));
            }
            Err(err) => return Err(err.into()),
        }
    }
    Ok(Report {
        json: json!({ "schema": SCHEMA, "stream": stream.to_string(), "V": v, "k": k, "q": q, "rows": list }),
        header: vec!["E", "count", "q", "ids", "note"],
        rows,
        failed: false,
    })
}

/// IDS and energy interval of one code.
pub fn ids_code(stream: &CfStream, v: f64, code: &Code) -> Result<Report, CliError> {
    let depth = code.depth();
    let entries = stream.entries(depth);
    let mu = mu_of_code(code, &entries)?;
    let ids = ids_by_code(code, stream)?;
    let mut sp = Spectra::new(v);
    let tree = CodeTree::build(&mut sp, &entries, depth)?;
    let nest = energy_of_code(&tree, code)?;
    let &(lo, hi) = nest.last().expect("depth 0 interval");
    let widths: Vec<f64> = nest.iter().map(|(a, b)| b - a).collect();
    Ok(Report {
        json: json!({
            "schema": SCHEMA,
            "stream": stream.to_string(),
            "V": v,
            "code": code.to_string(),
            "mu": mu.values(),
            "ids": ids.value,
            "k_used": ids.k_used,
            "residual_bound": ids.residual_bound,
            "E_lo": lo,
            "E_hi": hi,
            "widths": widths,
        }),
        header: vec!["code", "ids", "residual_bound", "E_lo", "E_hi"],
        rows: vec![vec![code.to_string(), cell(ids.value), cell(ids.residual_bound), cell(lo), cell(hi)]],
        failed: false,
    })
}

fn side_json(s: &GapSide) -> Value {
    json!({
        "code": s.code.to_string(),
        "mu": s.mu.values(),
        "band": [s.band.0, s.band.1],
        "ids": s.ids.value,
        "residual_bound": s.ids.residual_bound,
        "ids_error": s.ids_error,
    })
}

fn certificate_json(c: &GapCertificate) -> Value {
    let err_left = c.left.as_ref().map_or(Value::Null, |s| num(s.ids_error));
    json!({
        "ell": c.ell,
        "label": c.label,
        "E_lo": num(c.gap.0),
        "E_hi": num(c.gap.1),
        "ids": c.right.ids.value,
        "k": c.k,
        "status": "certified",
        "margins": {
            "gap_width": num(c.gap.1 - c.gap.0),
            "cover_overlap": num(c.cover_overlap),
            "ids_error_left": err_left,
            "ids_error_right": c.right.ids_error,
            "residual_bound": c.right.ids.residual_bound,
        },
        "left": c.left.as_ref().map_or(Value::Null, side_json),
        "right": side_json(&c.right),
    })
}

/// Gap certificates for every label in `lo..=hi` on one tree of depth `k`.
pub fn gaplabels(stream: &CfStream, v: f64, (lo, hi): (i64, i64), k: usize) -> Result<Report, CliError> {
    let mut sp = Spectra::new(v);
    let tree = CodeTree::build(&mut sp, &stream.entries(k), k)?;
    sp.lambda(stream, k)?;
    let labels: Vec<i64> = (lo..=hi).collect();
    let results: Vec<Result<GapCertificate, Error>> =
        labels.par_iter().map_init(|| sp.clone(), |sp, &ell| gap_certificate_in(&tree, sp, stream, ell)).collect();
    let mut rows = Vec::with_capacity(labels.len());
    let mut list = Vec::with_capacity(labels.len());
    let mut failed = 0;
    for (&ell, r) in labels.iter().zip(results) {
        match r {
            Ok(c) => {
                rows.push(vec![
                    ell.to_string(),
                    cell(c.label),
                    cell(c.gap.0),
                    cell(c.gap.1),
                    cell(c.right.ids.value),
                    c.k.to_string(),
                    "certified".into(),
                    String::new(),
                ]);
                list.push(certificate_json(&c));
            }
            Err(err) => {
                failed += 1;
                let e = CliError::from(err);
                rows.push(vec![ell.to_string(), String::new(), String::new(), String::new(), String::new(), k.to_string(), "failed".into(), e.message.clone()]);
                list.push(json!({ "ell": ell, "k": k, "status": "failed", "error": { "kind": e.kind, "message": e.message } }));
            }
        }
    }
    Ok(Report {
        json: json!({
            "schema": SCHEMA,
            "stream": stream.to_string(),
            "V": v,
            "k": k,
            "certified": labels.len() - failed,
            "failed": failed,
            "certificates": list,
        }),
        header: vec!["ell", "label", "E_lo", "E_hi", "ids", "k", "status", "error"],
        rows,
        failed: failed > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn farey_order() {
        assert_eq!(farey(1), vec![(0, 1), (1, 1)]);
        assert_eq!(farey(4), vec![(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)]);
        assert_eq!(farey(30).len(), 1 + (1..=30u64).map(|q| (1..=q).filter(|&p| num_gcd(p, q) == 1).count()).sum::<usize>());
    }

    fn num_gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            num_gcd(b, a % b)
        }
    }

    #[test]
    fn butterfly_at_qmax_one() {
        let r = butterfly(2.0, 1).unwrap();
        let got: Vec<Vec<f64>> = r.rows.iter().map(|row| row.iter().map(|x| x.parse().unwrap()).collect()).collect();
        let want = [[0.0, 2.0, -2.0, 2.0], [1.0, 2.0, 0.0, 4.0]];
        assert_eq!(got.len(), 2);
        for (g, w) in got.iter().zip(want) {
            assert!(g.iter().zip(w).all(|(x, y)| (x - y).abs() < 1e-12), "{g:?}");
        }
    }
}
