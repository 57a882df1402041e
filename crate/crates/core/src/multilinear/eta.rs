use num_complex::Complex64;
use rayon::prelude::*;

use super::covering::CoveringSequence;
use crate::coords::CoordVector;
use crate::error::{Error, Result};

pub const DEFAULT_WORK_CAP: u128 = 1 << 24;

/// Mixed-radix key of a tuple over the alphabet {0..a-1}: sum_t alpha_t a^t.
pub fn tuple_key(alpha: &[usize], alphabet: usize) -> u64 {
    alpha.iter().rev().fold(0u64, |acc, &v| acc * alphabet as u64 + v as u64)
}

/// Inverse of `tuple_key` for tuples of length `len`.
pub fn tuple_of_key(mut key: u64, alphabet: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((key % alphabet as u64) as usize);
        key /= alphabet as u64;
    }
    out
}

/// A dense kernel over A^m, indexed by `tuple_key`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theta {
    alphabet: usize,
    m: usize,
    values: Vec<Complex64>,
}

impl Theta {
    pub fn new(alphabet: usize, m: usize, values: Vec<Complex64>) -> Result<Self> {
        let size = checked_size(alphabet, m)?;
        if values.len() != size {
            return Err(Error::InvalidArgument(format!("theta needs {size} entries, got {}", values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("theta entries must be finite".into()));
        }
        Ok(Theta { alphabet, m, values })
    }

    pub fn ones(alphabet: usize, m: usize) -> Result<Self> {
        Self::new(alphabet, m, vec![Complex64::new(1.0, 0.0); checked_size(alphabet, m)?])
    }

    pub fn from_fn(alphabet: usize, m: usize, mut f: impl FnMut(&[usize]) -> Complex64) -> Result<Self> {
        let size = checked_size(alphabet, m)?;
        let values = (0..size as u64).map(|k| f(&tuple_of_key(k, alphabet, m))).collect();
        Self::new(alphabet, m, values)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, alpha: &[usize]) -> Complex64 {
        self.values[tuple_key(alpha, self.alphabet) as usize]
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn checked_size(alphabet: usize, m: usize) -> Result<usize> {
    if alphabet == 0 {
        return Err(Error::InvalidArgument("alphabet must be non-empty".into()));
    }
    (alphabet as u128)
        .checked_pow(m as u32)
        .filter(|&n| n <= DEFAULT_WORK_CAP)
        .map(|n| n as usize)
        .ok_or(Error::WorkCap {
            what: "theta table",
            needed: (alphabet as u128).saturating_pow(m as u32),
            cap: DEFAULT_WORK_CAP,
        })
}

/// sum over alpha in A^m of theta(alpha) prod_i x_i(pi_{S_i}(alpha)), where x_i is
/// keyed by `tuple_key` of the coordinates of S_i in increasing order.
pub fn eta_bruteforce(u: &CoveringSequence, theta: &Theta, args: &[CoordVector]) -> Result<Complex64> {
    eta_bruteforce_capped(u, theta, args, DEFAULT_WORK_CAP)
}

pub fn eta_bruteforce_capped(
    u: &CoveringSequence,
    theta: &Theta,
    args: &[CoordVector],
    work_cap: u128,
) -> Result<Complex64> {
    if args.len() != u.n() {
        return Err(Error::InvalidArgument(format!("{} arguments for {} sets", args.len(), u.n())));
    }
    if theta.m != u.m() {
        return Err(Error::InvalidArgument(format!("theta has m = {}, covering has m = {}", theta.m, u.m())));
    }
    let a = theta.alphabet;
    let work = (a as u128).pow(u.m() as u32) * u.n() as u128;
    if work > work_cap {
        return Err(Error::WorkCap {
            what: "eta brute force",
            needed: work,
            cap: work_cap,
        });
    }
    let size = theta.values.len() as u64;
    let chunk = 1024u64;
    let partials: Vec<Complex64> = (0..size.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut proj = Vec::new();
            for key in c * chunk..((c + 1) * chunk).min(size) {
                let th = theta.values[key as usize];
                if th == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let alpha = tuple_of_key(key, a, u.m());
                let mut term = th;
                for (s, x) in u.sets().iter().zip(args) {
                    proj.clear();
                    proj.extend(s.iter().map(|&j| alpha[j - 1]));
                    term *= x.get(tuple_key(&proj, a));
                    if term == Complex64::new(0.0, 0.0) {
                        break;
                    }
                }
                acc += term;
            }
            acc
        })
        .collect();
    Ok(partials.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::case_rng;
    use rand::Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn keys_roundtrip() {
        assert_eq!(tuple_key(&[1, 2], 3), 7);
        assert_eq!(tuple_of_key(7, 3, 2), vec![1, 2]);
        for k in 0..27 {
            assert_eq!(tuple_key(&tuple_of_key(k, 3, 3), 3), k);
        }
    }

    #[test]
    fn trivial_alphabet() {
        let u = CoveringSequence::parse("1,2;2,3;1,3").unwrap();
        let th = Theta::ones(1, 3).unwrap();
        let one = CoordVector::unit(0);
        assert_eq!(eta_bruteforce(&u, &th, &[one.clone(), one.clone(), one]).unwrap(), c(1.0));
    }

    #[test]
    fn single_coordinate_is_a_dot_product() {
        let u = CoveringSequence::parse("1;1").unwrap();
        let th = Theta::ones(3, 1).unwrap();
        let x = CoordVector::from_dense_complex(&[Complex64::new(0.3, 0.1), c(-0.5), c(0.2)]);
        let y = CoordVector::from_dense(&[0.7, 0.1, -0.4]);
        let got = eta_bruteforce(&u, &th, &[x.clone(), y.clone()]).unwrap();
        assert!((got - x.bilinear(&y)).norm() < 1e-15);
    }

    #[test]
    fn triangle_matches_nested_loops() {
        let u = CoveringSequence::parse("1,2;2,3;1,3").unwrap();
        let a = 3;
        let mut rng = case_rng(11, 0);
        let mut dense = || -> Vec<f64> { (0..a * a).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let (x, y, z) = (dense(), dense(), dense());
        let th = Theta::from_fn(a, 3, |al| c(1.0 + al[0] as f64 - 0.5 * al[2] as f64)).unwrap();
        let mut expect = 0.0;
        for i in 0..a {
            for j in 0..a {
                for k in 0..a {
                    let t = 1.0 + i as f64 - 0.5 * k as f64;
                    expect += t * x[i + a * j] * y[j + a * k] * z[i + a * k];
                }
            }
        }
        let args = [CoordVector::from_dense(&x), CoordVector::from_dense(&y), CoordVector::from_dense(&z)];
        let got = eta_bruteforce(&u, &th, &args).unwrap();
        assert!((got - c(expect)).norm() < 1e-12);
    }

    #[test]
    fn work_cap() {
        let u = CoveringSequence::parse("1,2;2,3;1,3").unwrap();
        let th = Theta::ones(3, 3).unwrap();
        let e = CoordVector::new();
        assert!(matches!(
            eta_bruteforce_capped(&u, &th, &[e.clone(), e.clone(), e], 10),
            Err(Error::WorkCap { .. })
        ));
        assert!(matches!(Theta::ones(100, 5), Err(Error::WorkCap { .. })));
    }
}
