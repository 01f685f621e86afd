use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sturmian")).args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON output");
    assert_eq!(v["schema"], 1);
    v
}

fn close(x: &Value, y: f64) -> bool {
    (x.as_f64().unwrap() - y).abs() < 1e-12
}

#[test]
fn spectrum_of_the_small_words() {
    let v = json_ok(&["spectrum", "--cf", "0,0,1", "--V", "5"]);
    let bands = v["bands"].as_array().unwrap();
    assert_eq!(bands.len(), 1);
    assert!(close(&bands[0]["lo"], 3.0) && close(&bands[0]["hi"], 7.0));
    assert_eq!(bands[0]["type"], "B");

    let v = json_ok(&["spectrum", "--cf", "0,0", "--V", "5"]);
    assert!(close(&v["bands"][0]["lo"], -2.0) && close(&v["bands"][0]["hi"], 2.0));
    assert_eq!(v["bands"][0]["type"], "A");
}

#[test]
fn spectrum_from_a_fraction() {
    let v = json_ok(&["spectrum", "--alpha", "5/13", "--V", "5"]);
    assert_eq!(v["q"], 13);
    assert_eq!(v["word"], serde_json::json!([0, 0, 2, 1, 1, 2]));
    let bands = v["bands"].as_array().unwrap();
    for w in bands.windows(2) {
        assert!(w[0]["hi"].as_f64().unwrap() < w[1]["lo"].as_f64().unwrap());
    }
    assert!(bands.iter().all(|b| b["type"] == "A" || b["type"] == "B"));
}

#[test]
fn butterfly_rows() {
    let out = run(&["butterfly", "--V", "2", "--qmax", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["alpha", "V", "lo", "hi"]);
    let rows: Vec<Vec<f64>> = rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    let expect = [[0.0, 2.0, -2.0, 2.0], [1.0, 2.0, 0.0, 4.0]];
    for (r, e) in rows.iter().zip(expect) {
        for (x, y) in r.iter().zip(e) {
            assert!((x - y).abs() < 1e-12, "{r:?}");
        }
    }
}

#[test]
fn butterfly_output_is_deterministic() {
    let a = run(&["butterfly", "--V", "3", "--qmax", "12", "--format", "csv", "--threads", "1"]);
    let b = run(&["butterfly", "--V", "3", "--qmax", "12", "--format", "csv", "--threads", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = String::from_utf8(a.stdout).unwrap().lines().count() - 1;
    // Σ over the Farey fractions of their denominators.
    let total: u64 = (1..=12u64).map(|q| (1..=q).filter(|&p| gcd(p, q) == 1).count() as u64 * q).sum::<u64>() + 1;
    assert_eq!(rows as u64, total);
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn gap_labels_certify() {
    let v = json_ok(&["gaplabels", "--ell", "-3..3", "--k", "8", "--V", "5"]);
    assert_eq!(v["failed"], 0);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 7);
    for c in certs {
        assert_eq!(c["status"], "certified");
        assert!(c["margins"]["cover_overlap"].as_f64().unwrap() <= 0.0);
    }
    assert!(certs[3]["E_lo"].is_null());
    let a = run(&["gaplabels", "--ell", "-4..4", "--k", "8", "--threads", "1"]);
    let b = run(&["gaplabels", "--ell", "-4..4", "--k", "8", "--threads", "2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ids_grid_is_monotone() {
    let v = json_ok(&["ids", "--cf", "2,1,1,2", "--k", "4", "--steps", "40"]);
    assert_eq!(v["q"], 13);
    let vals: Vec<f64> = v["rows"].as_array().unwrap().iter().filter_map(|r| r["ids"].as_f64()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(vals.first(), Some(&0.0));
    assert_eq!(vals.last(), Some(&1.0));
}

#[test]
fn ids_of_a_code() {
    let v = json_ok(&["ids", "--cf", "1", "--code", "A1.G1.B.G1.B"]);
    let ids = v["ids"].as_f64().unwrap();
    let r = v["residual_bound"].as_f64().unwrap();
    assert!((0.0..=1.0 + r).contains(&ids));
    assert!(v["E_lo"].as_f64().unwrap() <= v["E_hi"].as_f64().unwrap());
}

#[test]
fn verify_suites_pass() {
    for suite in ["cf", "words", "traces", "coding", "spectra", "ids"] {
        let v = json_ok(&["verify", "--suite", suite]);
        assert_eq!(v["failed"], 0, "{suite}: {v}");
    }
}

#[test]
fn failures_are_json_and_nonzero() {
    for args in [
        vec!["butterfly", "--V", "0", "--qmax", "4"],
        vec!["butterfly", "--V", "2", "--qmax", "513"],
        vec!["spectrum", "--cf", "0,1", "--V", "5"],
        vec!["spectrum", "--V", "5"],
        vec!["ids", "--code", "A1.B"],
        vec!["nonsense"],
    ] {
        let out = run(&args);
        assert!(!out.status.success(), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("JSON error");
        assert_eq!(err["schema"], 1);
        assert!(err["error"]["kind"].is_string() && err["error"]["message"].is_string());
    }
}

#[test]
fn writes_to_a_file() {
    let path = std::env::temp_dir().join(format!("sturmian-cli-test-{}.csv", std::process::id()));
    let out = run(&["spectrum", "--cf", "0,0,2,1", "--V", "5", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(text.lines().next(), Some("index,lo,hi,type"));
    assert_eq!(text.lines().count(), 4);
}
