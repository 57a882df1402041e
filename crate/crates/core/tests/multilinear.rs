mod common;

use dyadic_grothendieck::multilinear::{
    alpha_lp, build_tables, eta_bruteforce, frac_convolution, phi_k_parseval, psi_gauge, random_unit_argument,
    standard_form, three_halves_product, verify_multilinear, CoveringSequence, PointSet, SlotRegistry, Theta,
};
use dyadic_grothendieck::phi::PhiConfig;
use dyadic_grothendieck::rng::case_rng;
use dyadic_grothendieck::CoordVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn convolution_matches_brute_force_on_standard_coverings() {
    let cfg = PhiConfig::exact(8);
    for s in ["1;1", "1;1;1", "1;1;1;1", "1,2;2,3;1,3"] {
        let u = CoveringSequence::parse(s).unwrap();
        for a in [2usize, 3] {
            for case in 0..10 {
                let mut rng = case_rng(41, (a as u64) << 16 | case);
                let args: Vec<CoordVector> = u
                    .sets()
                    .iter()
                    .map(|st| {
                        let x = random_unit_argument(&mut rng, a, st.len());
                        x.scale(Complex64::from_polar(rng.gen_range(0.2..1.5), rng.gen_range(0.0..6.3)))
                    })
                    .collect();
                let r = verify_multilinear(&u, &args, a, &cfg).unwrap();
                assert!(r.exact);
                assert!(r.defect <= 1e-9, "{s} |A|={a} case {case}: {r:?}");
            }
        }
    }
}

#[test]
fn single_coordinate_convolution_is_the_k_fold_product() {
    let cfg = PhiConfig::exact(8);
    for k in 2..=4usize {
        let u = CoveringSequence::new(1, vec![vec![1]; k]).unwrap();
        for case in 0..10 {
            let mut rng = case_rng(43, (k as u64) << 16 | case);
            let xs: Vec<CoordVector> = (0..k).map(|_| common::ball_vector(&mut rng, 3, 2.0)).collect();
            let mut reg = SlotRegistry::new(1);
            let tables = build_tables(&u, &xs, 3, &mut reg, &cfg).unwrap();
            let conv = frac_convolution(&u, &tables).unwrap();
            let spectral = phi_k_parseval(&xs, k as u32, reg.session_mut(1), &cfg).unwrap();
            assert!((conv - spectral.value).norm() <= 1e-12, "k={k}: {conv} vs {}", spectral.value);
        }
    }
}

#[test]
fn psi_is_non_decreasing() {
    let mut rng = case_rng(47, 0);
    for _ in 0..10 {
        let points: Vec<Vec<u64>> = (0..30).map(|_| (0..3).map(|_| rng.gen_range(0..5)).collect()).collect();
        let e: Vec<u64> = (0..5).collect();
        let f = PointSet::new(vec![e.clone(), e.clone(), e], points).unwrap();
        let vals: Vec<usize> = (1..=5).map(|s| psi_gauge(&f, s).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
        assert_eq!(vals[4], f.len());
    }
    let f = three_halves_product(2);
    let vals: Vec<usize> = (1..=4).map(|s| psi_gauge(&f, s).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
}

fn arb_covering() -> impl Strategy<Value = CoveringSequence> {
    (1usize..=4)
        .prop_flat_map(|m| (Just(m), prop::collection::vec(prop::collection::btree_set(1..=m, 1..=m), 2..=4)))
        .prop_filter_map("covering", |(m, sets)| {
            CoveringSequence::new(m, sets.into_iter().map(|s| s.into_iter().collect()).collect()).ok()
        })
}

proptest! {
    #[test]
    fn alpha_and_incidence_under_standard_form(u in arb_covering()) {
        let v = standard_form(&u);
        prop_assert_eq!(alpha_lp(&v).unwrap(), alpha_lp(&u).unwrap());
        prop_assert!(v.min_incidence() >= u.min_incidence());
        prop_assert_eq!(standard_form(&v), v);
    }

    #[test]
    fn eta_is_bounded_when_every_index_is_covered_twice(u in arb_covering(), a in 1usize..=3, seed in 0u64..1_000_000) {
        prop_assume!(u.min_incidence() >= 2);
        let mut rng = case_rng(seed, 0);
        let theta = Theta::from_fn(a, u.m(), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
        let args: Vec<CoordVector> = u
            .sets()
            .iter()
            .map(|s| common::complex_vector(&mut rng, a.pow(s.len() as u32), 2.0, 1.0))
            .collect();
        let eta = eta_bruteforce(&u, &theta, &args).unwrap();
        let bound = theta.norm_sup() * args.iter().map(|x| x.norm_l2()).product::<f64>();
        prop_assert!(eta.norm() <= bound * (1.0 + 1e-12));
    }
}
