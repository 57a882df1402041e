use dyadic_grothendieck::{
    conj_series, evaluate, parseval_pair, series_mul, sup_norm, Character, GeneratorId, SessionId, SignVector,
    SupMode, WalshSeries,
};
use num_complex::Complex64;
use proptest::prelude::*;

const SESSION: SessionId = SessionId(u64::MAX);

fn arb_series(gens: u32, max_terms: usize) -> impl Strategy<Value = WalshSeries> {
    prop::collection::vec(
        (prop::collection::btree_set(0..gens, 0..=4), -1.0f64..1.0, -1.0f64..1.0),
        0..=max_terms,
    )
    .prop_map(|terms| {
        WalshSeries::from_terms(
            SESSION,
            terms
                .into_iter()
                .map(|(g, re, im)| (Character::from_gens(g.into_iter().map(GeneratorId)), Complex64::new(re, im))),
        )
    })
}

fn max_gap(a: &WalshSeries, b: &WalshSeries) -> f64 {
    a.terms()
        .map(|(w, c)| (c - b.coeff(w)).norm())
        .chain(b.terms().map(|(w, c)| (a.coeff(w) - c).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn characters_are_orthonormal() {
    let chars: Vec<Character> = (0u32..16)
        .map(|m| Character::from_gens((0..4).filter(|b| m >> b & 1 == 1).map(GeneratorId)))
        .collect();
    for a in &chars {
        for b in &chars {
            let fa = WalshSeries::from_terms(SESSION, [(a.clone(), Complex64::new(1.0, 0.0))]);
            let fb = WalshSeries::from_terms(SESSION, [(b.clone(), Complex64::new(1.0, 0.0))]);
            let want = if a == b { 1.0 } else { 0.0 };
            assert_eq!(parseval_pair(&fa, &fb).unwrap(), Complex64::new(want, 0.0));
        }
    }
}

proptest! {
    #[test]
    fn plancherel(f in arb_series(10, 12)) {
        let p = parseval_pair(&f, &conj_series(&f)).unwrap();
        let n2 = f.l2_norm().powi(2);
        prop_assert!((p.re - n2).abs() < 1e-12 && p.im.abs() < 1e-12);
    }

    #[test]
    fn haar_integral_matches_spectral_pairing(f in arb_series(12, 10), g in arb_series(12, 10)) {
        let mut gens: Vec<GeneratorId> = f.active_generators();
        gens.extend(g.active_generators());
        gens.sort_unstable();
        gens.dedup();
        let n = 1u64 << gens.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for mask in 0..n {
            let omega = SignVector::from_mask(&gens, mask);
            acc += evaluate(&f, &omega) * evaluate(&g, &omega);
        }
        let mean = acc / n as f64;
        prop_assert!((mean - parseval_pair(&f, &g).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn sup_bounds_are_ordered(f in arb_series(14, 12), seed in 0u64..1000) {
        let exact = sup_norm(&f, SupMode::exact()).unwrap();
        prop_assert_eq!(exact.lower, exact.upper);
        let sampled = sup_norm(&f, SupMode::Sampled { samples: 64, seed }).unwrap();
        prop_assert!(sampled.lower <= sampled.upper);
        prop_assert!(sampled.lower <= exact.upper + 1e-12);
    }

    #[test]
    fn multiplication_is_commutative_and_associative(
        f in arb_series(6, 6),
        g in arb_series(6, 6),
        h in arb_series(6, 6),
    ) {
        let fg = series_mul(&f, &g, 0.0).unwrap();
        let gf = series_mul(&g, &f, 0.0).unwrap();
        prop_assert!(max_gap(&fg, &gf) < 1e-12);
        let left = series_mul(&fg, &h, 0.0).unwrap();
        let right = series_mul(&f, &series_mul(&g, &h, 0.0).unwrap(), 0.0).unwrap();
        prop_assert!(max_gap(&left, &right) < 1e-12);
    }

    #[test]
    fn product_evaluates_pointwise(f in arb_series(8, 6), g in arb_series(8, 6), mask in 0u64..256) {
        let gens: Vec<GeneratorId> = (0..8).map(GeneratorId).collect();
        let omega = SignVector::from_mask(&gens, mask);
        let fg = series_mul(&f, &g, 0.0).unwrap();
        let want = evaluate(&f, &omega) * evaluate(&g, &omega);
        prop_assert!((evaluate(&fg, &omega) - want).norm() < 1e-12);
    }
}
