use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::coords::CoordVector;
use crate::dyadic::{Session, WalshSeries};
use crate::error::{Error, Result};
use crate::phi::{build_phi_k, PhiConfig, ROUNDOFF_FACTOR};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KFoldReport {
    pub k: u32,
    pub value: Complex64,
    pub expected: Complex64,
    pub defect: f64,
    pub budget: f64,
    pub telescope_budget: f64,
}

impl KFoldReport {
    pub fn passes(&self) -> bool {
        self.defect <= self.budget
    }
}

/// sum over characters gamma of prod_i f_i^(gamma), walking the smallest series.
pub fn spectral_product(series: &[WalshSeries]) -> Result<(Complex64, f64)> {
    let Some(first) = series.first() else {
        return Err(Error::InvalidArgument("no series".into()));
    };
    if let Some(f) = series.iter().find(|f| f.session() != first.session()) {
        return Err(Error::SessionMismatch(first.session().0, f.session().0));
    }
    let pivot = series.iter().min_by_key(|f| f.len()).expect("non-empty");
    let (mut value, mut mass) = (Complex64::new(0.0, 0.0), 0.0);
    for (w, c) in pivot.terms() {
        let mut term = Complex64::new(1.0, 0.0);
        let mut abs = 1.0;
        for f in series {
            let v = if std::ptr::eq(f, pivot) { *c } else { f.coeff(w) };
            term *= v;
            abs *= v.norm();
        }
        value += term;
        mass += abs;
    }
    Ok((value, mass))
}

/// The k-fold spectral product of the maps of `xs` in one session, compared with
/// sum_a prod_i x_i(a). Needs exactly k vectors.
pub fn phi_k_parseval(xs: &[CoordVector], k: u32, session: &mut Session, config: &PhiConfig) -> Result<KFoldReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    if xs.len() != k as usize {
        return Err(Error::InvalidArgument(format!("{} vectors for k = {k}", xs.len())));
    }
    let phis = xs.iter().map(|x| build_phi_k(x, k, session, config)).collect::<Result<Vec<_>>>()?;
    let series: Vec<WalshSeries> = phis.iter().map(|p| p.assembled()).collect();
    let (value, mass) = spectral_product(&series)?;
    let keys: BTreeSet<u64> = xs[0].iter().map(|(a, _)| a).collect();
    let expected: Complex64 = keys.iter().map(|&a| xs.iter().map(|x| x.get(a)).product::<Complex64>()).sum();
    // Holder with exponent k <= 2-norms bounds the leftover product of the tails
    let telescope_budget: f64 = phis.iter().map(|p| p.certificate().telescope_remainder).product();
    Ok(KFoldReport {
        k,
        value,
        expected,
        defect: (value - expected).norm(),
        budget: telescope_budget + ROUNDOFF_FACTOR * (mass + expected.norm()),
        telescope_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{pair_dot, Scheme};
    use crate::rng::case_rng;
    use rand::Rng;

    #[test]
    fn unit_vectors() {
        let mut s = Session::new();
        let e = CoordVector::unit(1);
        let r = phi_k_parseval(&[e.clone(), e.clone(), e], 3, &mut s, &PhiConfig::exact(6)).unwrap();
        assert_eq!(r.value, Complex64::new(1.0, 0.0));
        assert_eq!(r.defect, 0.0);
    }

    #[test]
    fn three_equal_coordinates() {
        let a = 3f64.powf(-0.5);
        let x = CoordVector::from_dense(&[a, a, a]);
        let mut s = Session::new();
        let r = phi_k_parseval(&[x.clone(), x.clone(), x], 3, &mut s, &PhiConfig::exact(6)).unwrap();
        assert!((r.expected.re - 3f64.powf(-0.5)).abs() < 1e-15);
        assert!(r.defect < 1e-14, "{r:?}");
        assert_eq!(r.telescope_budget, 0.0);
        assert!(r.passes());
    }

    #[test]
    fn two_fold_is_the_unconjugated_pairing() {
        let x = CoordVector::from_dense_complex(&[Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.1), Complex64::new(0.5, 0.0)]);
        let y = CoordVector::from_dense_complex(&[Complex64::new(0.1, -0.6), Complex64::new(0.2, 0.2), Complex64::new(-0.3, 0.4)]);
        let cfg = PhiConfig::exact(6);
        let mut s = Session::new();
        let r = phi_k_parseval(&[x.clone(), y.clone()], 2, &mut s, &cfg).unwrap();
        let mut s2 = Session::new();
        let p = pair_dot(&x, &y.conj(), Scheme::PhiK { k: 2 }, &mut s2, &cfg).unwrap();
        assert!((r.value - p.value).norm() < 1e-14);
        assert!((r.expected - x.bilinear(&y)).norm() < 1e-15);
        assert!(r.passes());
    }

    #[test]
    fn random_k_fold_within_budget() {
        for k in 2..=4u32 {
            for case in 0..20 {
                let mut rng = case_rng(3, u64::from(k) * 100 + case);
                let dim = rng.gen_range(1..=4);
                let xs: Vec<CoordVector> = (0..k)
                    .map(|_| CoordVector::from_dense(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
                    .collect();
                let mut s = Session::new();
                let r = phi_k_parseval(&xs, k, &mut s, &PhiConfig::truncated(5)).unwrap();
                assert!(r.passes(), "k={k} case={case} {r:?}");
            }
        }
    }

    #[test]
    fn arity_checks() {
        let mut s = Session::new();
        let e = CoordVector::unit(0);
        assert!(phi_k_parseval(&[e.clone()], 1, &mut s, &PhiConfig::exact(2)).is_err());
        assert!(phi_k_parseval(&[e.clone(), e], 3, &mut s, &PhiConfig::exact(2)).is_err());
    }
}
