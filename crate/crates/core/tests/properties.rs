//! Property tests over random continued fractions, codes and energies.

mod common;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use sturmian::cf::{convergents, CfStream, CfWord};
use sturmian::coding::{
    children, code_of_mu, counting_matrix_t, cumulative_s, enumerate_codes, left_count, left_count_brute, mu_of_code, Code,
    CodeTree, Letter,
};
use sturmian::ids::{decompose_label, ids_by_band_counting, ids_by_code, resum_label};
use sturmian::num::Poly;
use sturmian::spectra::{charpoly_residual, edge_residual, BandType, Spectra};
use sturmian::traces::{cheb_poly, discriminant, trace_step, AtEnergy, Discriminant, TraceSource};
use sturmian::words::{period_direct, period_recursive};

fn tail_strategy(max_entry: u64, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1..=max_entry, 1..=max_len)
}

fn word(tail: &[u64]) -> CfWord {
    CfWord::from_tail(&tail.iter().map(|&c| c as i64).collect::<Vec<_>>()).unwrap()
}

/// A code of length `entries.len() + 1` picked by the `choices`.
fn code_from_choices(entries: &[u64], choices: &[usize]) -> Code {
    let mut code = Code::default();
    for j in 0..=entries.len() {
        let c = if j == 0 { 0 } else { entries[j - 1] };
        let opts = children(code.last(), c);
        code.push(opts[choices[j] % opts.len()]);
    }
    code
}

fn code_strategy(max_entry: u64, max_len: usize) -> impl Strategy<Value = (Vec<u64>, Code)> {
    tail_strategy(max_entry, max_len).prop_flat_map(|entries| {
        let n = entries.len() + 1;
        (Just(entries), prop::collection::vec(0usize..16, n)).prop_map(|(e, ch)| {
            let code = code_from_choices(&e, &ch);
            (e, code)
        })
    })
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convergent_determinants_alternate(tail in tail_strategy(6, 10)) {
        let conv = convergents(&tail, tail.len());
        for w in conv.windows(2) {
            let det = &w[1].0 * &w[0].1 - &w[0].0 * &w[1].1;
            prop_assert_eq!(det.abs(), BigInt::one());
        }
        let (p, q) = conv.last().unwrap().clone();
        prop_assert_eq!(word(&tail).evaluate().numer().clone(), p);
        prop_assert_eq!(word(&tail).evaluate().denom().clone(), q);
    }

    #[test]
    fn period_has_slope_p_over_q(tail in tail_strategy(4, 6)) {
        let w = period_direct(&word(&tail)).unwrap();
        let conv = convergents(&tail, tail.len());
        let (p, q) = conv.last().unwrap();
        prop_assert_eq!(BigInt::from(w.len()), q.clone());
        prop_assert_eq!(BigInt::from(w.ones()), p.clone());
    }

    #[test]
    fn recursive_period_matches_direct(period in prop::collection::vec(1u64..=3, 1..=3), k in 1usize..9) {
        let s = CfStream::periodic(period).unwrap();
        prop_assert_eq!(period_recursive(&s, k).unwrap(), period_direct(&s.word(k)).unwrap());
    }

    #[test]
    fn transfer_matrices_are_unimodular(tail in tail_strategy(3, 5), e in -60i64..60, v in 1i64..40) {
        let src = AtEnergy { e: rational(e, 7), v: rational(v, 4) };
        let m = src.matrix(&word(&tail)).unwrap();
        prop_assert_eq!(m.det(), BigRational::one());
    }

    #[test]
    fn trace_recursion_at_rational_energy(tail in tail_strategy(3, 4), m in 0i64..4, e in -60i64..60, v in 1i64..40) {
        let src = AtEnergy { e: rational(e, 5), v: rational(v, 3) };
        let c = word(&tail);
        let t = |w: &CfWord| src.trace(w).unwrap();
        let next = trace_step(&t(&c), &t(&c.extend(m).unwrap()), &t(&c.extend(m - 1).unwrap()));
        prop_assert_eq!(next, t(&c.extend(m + 1).unwrap()));
    }

    #[test]
    fn numeric_discriminant_matches_polynomial(tail in tail_strategy(3, 4), e in -80i64..80, v in 1i64..30) {
        let c = word(&tail);
        let vq = rational(v, 2);
        let poly = discriminant(&c, &vq).unwrap();
        let num = Discriminant::new(&c, v as f64 / 2.0).unwrap();
        let eq = rational(e, 8);
        prop_assert_eq!(poly.eval(&eq), num.eval(&eq));
    }

    #[test]
    fn cassini_identity(n in 1i64..120) {
        let one = Poly::<BigInt>::constant(BigInt::one());
        let lhs = cheb_poly::<BigInt>(n + 1) * cheb_poly::<BigInt>(n - 1) - cheb_poly::<BigInt>(n) * cheb_poly::<BigInt>(n);
        prop_assert_eq!(lhs, -one);
    }

    #[test]
    fn counting_matrices_have_unit_determinant(entries in prop::collection::vec(1u64..=9, 0..=8)) {
        for &c in &entries {
            prop_assert_eq!(counting_matrix_t(c).det(), BigInt::one());
        }
        let (s, s_inv) = cumulative_s(&entries).unwrap();
        prop_assert_eq!(s.det(), BigInt::one());
        prop_assert_eq!(s.mul(&s_inv), sturmian::coding::CountMatrix::identity());
    }

    #[test]
    fn spectral_codes_count_denominator(tail in tail_strategy(3, 6)) {
        let q = common::denominator(&tail);
        prop_assert_eq!(enumerate_codes(&tail, true).unwrap().len() as u64, q);
    }

    #[test]
    fn mu_determines_code((entries, code) in code_strategy(3, 7)) {
        let mu = mu_of_code(&code, &entries).unwrap();
        let k = code.depth();
        prop_assert_eq!(mu.last_index(), k as i64 - 1);
        if k >= 1 {
            let back = code_of_mu(&mu, &entries).unwrap();
            prop_assert_eq!(back, code.prefix(k - 1));
        }
    }

    #[test]
    fn left_count_matches_enumeration((entries, code) in code_strategy(3, 6), k in 0usize..7) {
        let k = k.min(entries.len());
        let (total, per) = left_count(&code, &entries, k).unwrap();
        prop_assert_eq!(per.iter().sum::<BigInt>(), total.clone());
        prop_assert_eq!(total, BigInt::from(left_count_brute(&code, &entries, k).unwrap()));
    }

    #[test]
    fn code_order_is_total_and_antisymmetric((entries, a) in code_strategy(2, 5), choices in prop::collection::vec(0usize..16, 6)) {
        let b = code_from_choices(&entries, &choices);
        prop_assert_eq!(a.cmp_order(&b), b.cmp_order(&a).reverse());
        prop_assert_eq!(a.cmp_order(&b) == Ordering::Equal, a == b);
    }

    #[test]
    fn labels_resum_exactly(ell in -500i64..=500, fib in any::<bool>()) {
        let stream = if fib { CfStream::fibonacci() } else { CfStream::periodic(vec![2, 1, 1, 2]).unwrap() };
        let conv = stream.convergents(24);
        let mu = decompose_label(ell, &conv).unwrap();
        prop_assert_eq!(resum_label(&mu, &conv).unwrap(), BigInt::from(ell));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bands_have_edges_on_level_two(tail in tail_strategy(3, 5), v in 4.5f64..10.0) {
        let c = word(&tail);
        let q = common::denominator(&tail) as usize;
        let bands = Spectra::new(v).bands(&c).unwrap();
        prop_assert_eq!(bands.len(), q);
        for b in &bands {
            prop_assert!(b.lo < b.hi);
            prop_assert!(edge_residual(b, v).unwrap() < 1e-9);
        }
        for w in bands.windows(2) {
            prop_assert!(w[0].separation(&w[1]) > 0.0);
        }
    }

    #[test]
    fn bloch_determinant_is_shifted_discriminant(tail in tail_strategy(3, 5), theta in 0.0f64..6.283, e in -3.0f64..13.0, v in 0.5f64..10.0) {
        let c = word(&tail);
        let d = Discriminant::new(&c, v).unwrap();
        let t: f64 = d.eval(&e);
        prop_assume!(t.abs() < 1e6);
        prop_assert!(charpoly_residual(&c, v, theta, e).unwrap() < 1e-8 * t.abs().max(1.0));
    }

    #[test]
    fn band_types_do_not_depend_on_coupling(tail in tail_strategy(3, 4)) {
        let c = word(&tail);
        let types = |v: f64| -> Vec<BandType> {
            Spectra::new(v).typed_bands(&c).unwrap().iter().map(|b| b.btype).collect()
        };
        let base = types(4.5);
        prop_assert!(base.iter().all(|t| *t != BandType::Unclassified));
        prop_assert_eq!(&types(6.0), &base);
        prop_assert_eq!(&types(10.0), &base);
    }

    #[test]
    fn band_map_preserves_order(entries in tail_strategy(3, 4), v in 4.5f64..9.0) {
        let depth = entries.len();
        let tree = CodeTree::build(&mut Spectra::new(v), &entries, depth).unwrap();
        for k in 0..=depth {
            let level = tree.level(k);
            let codes: Vec<Code> = enumerate_codes(&entries[..k], false).unwrap();
            prop_assert_eq!(level.len(), codes.len());
            for (node, code) in level.iter().zip(&codes) {
                prop_assert_eq!(&node.code, code);
            }
            for w in level.windows(2) {
                prop_assert_eq!(w[0].code.cmp_order(&w[1].code), Ordering::Less);
                prop_assert!(w[0].band.lo <= w[1].band.lo);
            }
        }
    }

    #[test]
    fn band_counting_ids_is_monotone(mut es in prop::collection::vec(-3.0f64..9.0, 2..12), k in 1usize..7) {
        let stream = CfStream::fibonacci();
        let mut sp = Spectra::new(5.0);
        es.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = BigRational::zero();
        for e in es {
            if let Ok(n) = ids_by_band_counting(&mut sp, &stream, e, k) {
                prop_assert!(n >= prev);
                prop_assert!(n <= BigRational::one());
                prev = n;
            }
        }
    }

    #[test]
    fn code_ids_is_monotone_in_code_order((entries, a) in code_strategy(2, 6), choices in prop::collection::vec(0usize..16, 7)) {
        prop_assume!(entries.len() >= 2);
        let stream = CfStream::new(vec![], entries.clone()).unwrap();
        let b = code_from_choices(&entries, &choices);
        let (ia, ib) = (ids_by_code(&a, &stream).unwrap(), ids_by_code(&b, &stream).unwrap());
        let slack = ia.residual_bound + ib.residual_bound + 1e-12;
        match a.cmp_order(&b) {
            Ordering::Less => prop_assert!(ia.value <= ib.value + slack),
            Ordering::Greater => prop_assert!(ib.value <= ia.value + slack),
            Ordering::Equal => prop_assert!((ia.value - ib.value).abs() < 1e-12),
        }
        prop_assert!(matches!(a.at(0), Letter::A(1) | Letter::G(2)));
    }
}
