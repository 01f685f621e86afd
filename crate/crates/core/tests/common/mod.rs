#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sturmian::cf::{convergents, CfStream, CfWord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Denominator of `[0, 0, tail…]`.
pub fn denominator(tail: &[u64]) -> u64 {
    let conv = convergents(tail, tail.len());
    conv.last().map(|(_, q)| q.try_into().unwrap()).unwrap()
}

/// `n` distinct convergent words with entries in `1..=max_entry` and
/// `2 ≤ q ≤ q_max`, drawn from a fixed seed.
pub fn corpus(n: usize, max_entry: u64, q_max: u64, seed: u64) -> Vec<CfWord> {
    let mut r = rng(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = r.gen_range(1..=8);
        let tail: Vec<u64> = (0..len).map(|_| r.gen_range(1..=max_entry)).collect();
        let q = denominator(&tail);
        if !(2..=q_max).contains(&q) {
            continue;
        }
        let w = CfWord::from_tail(&tail.iter().map(|&c| c as i64).collect::<Vec<_>>()).unwrap();
        if seen.insert(w.evaluate()) {
            out.push(w);
        }
    }
    out
}

/// Periodic streams with short periods and entries in `1..=max_entry`.
pub fn streams(n: usize, max_entry: u64, seed: u64) -> Vec<CfStream> {
    let mut r = rng(seed);
    let mut out = vec![CfStream::fibonacci()];
    while out.len() < n {
        let len = r.gen_range(1..=4);
        let period: Vec<u64> = (0..len).map(|_| r.gen_range(1..=max_entry)).collect();
        let s = CfStream::periodic(period).unwrap();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}
