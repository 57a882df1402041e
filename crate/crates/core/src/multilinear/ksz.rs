//! Random-sign trilinear forms sum eps_ijk r_ij (x) r_jk (x) r_ik. Their sup is
//! estimated from below by alternating best responses from random starts, so
//! `vnorm_lower = N^3 / sup_estimate` over-estimates the certified quantity and is
//! only illustrative.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::case_rng;

pub const KSZ_MAX_N: usize = 12;
const MAX_ROUNDS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KszSigns {
    Random,
    AllPlus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KszRecord {
    pub n: usize,
    pub trials: usize,
    pub samples: usize,
    pub sup_estimate: f64,
    pub l1_bound: f64,
    pub vnorm_lower: f64,
}

struct Form {
    n: usize,
    eps: Vec<i8>,
}

impl Form {
    fn e(&self, i: usize, j: usize, k: usize) -> f64 {
        f64::from(self.eps[(i * self.n + j) * self.n + k])
    }

    /// Best response in slot `which` (0: ij, 1: jk, 2: ik) against the other two;
    /// returns the new slot vector and the attained value.
    fn best_response(&self, which: usize, w: &[Vec<f64>; 3]) -> (Vec<f64>, f64) {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let e = self.e(i, j, k);
                    match which {
                        0 => c[i * n + j] += e * w[1][j * n + k] * w[2][i * n + k],
                        1 => c[j * n + k] += e * w[0][i * n + j] * w[2][i * n + k],
                        _ => c[i * n + k] += e * w[0][i * n + j] * w[1][j * n + k],
                    }
                }
            }
        }
        let value = c.iter().map(|v| v.abs()).sum();
        (c.into_iter().map(|v| if v < 0.0 { -1.0 } else { 1.0 }).collect(), value)
    }

    fn local_max<R: Rng>(&self, rng: &mut R) -> f64 {
        let nn = self.n * self.n;
        let mut sign = || -> Vec<f64> { (0..nn).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect() };
        let mut w = [sign(), sign(), sign()];
        let mut best = 0.0;
        for _ in 0..MAX_ROUNDS {
            let before = best;
            for which in 0..3 {
                let (v, value) = self.best_response(which, &w);
                w[which] = v;
                best = value;
            }
            if best <= before {
                break;
            }
        }
        best
    }
}

/// Best (largest) `vnorm_lower` over `trials` sign draws, each with a sup estimate
/// from `samples` random starts.
pub fn ksz_demo(n: usize, trials: usize, samples: usize, seed: u64, signs: KszSigns) -> Result<KszRecord> {
    if n == 0 || n > KSZ_MAX_N {
        return Err(Error::InvalidArgument(format!("N must lie in 1..={KSZ_MAX_N}, got {n}")));
    }
    if trials == 0 || samples == 0 {
        return Err(Error::InvalidArgument("trials and samples must be positive".into()));
    }
    let cube = n * n * n;
    let sups: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = case_rng(seed, ((n as u64) << 32) | t as u64);
            let eps = match signs {
                KszSigns::Random => (0..cube).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
                KszSigns::AllPlus => vec![1; cube],
            };
            let form = Form { n, eps };
            (0..samples).map(|_| form.local_max(&mut rng)).fold(0.0, f64::max)
        })
        .collect();
    let sup = sups.into_iter().fold(f64::INFINITY, f64::min);
    let l1 = cube as f64;
    Ok(KszRecord {
        n,
        trials,
        samples,
        sup_estimate: sup,
        l1_bound: l1,
        vnorm_lower: l1 / sup,
    })
}
