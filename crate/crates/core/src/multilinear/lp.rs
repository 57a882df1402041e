use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::covering::CoveringSequence;
use crate::error::{Error, Result};

pub const LP_DIMENSION_CAP: usize = 12;

/// max sum_j v_j subject to sum_{j in S} v_j <= 1 for every S in U and v >= 0,
/// solved exactly with a rational simplex (Bland's rule, starting at v = 0).
pub fn alpha_lp(u: &CoveringSequence) -> Result<BigRational> {
    let m = u.m();
    if m > LP_DIMENSION_CAP {
        return Err(Error::DimensionCap(m));
    }
    let n = u.n();
    let cols = m + n;
    let zero = BigRational::zero();
    let one = BigRational::one();
    // rows: [a_1..a_m | slack_1..slack_n | rhs]
    let mut rows: Vec<Vec<BigRational>> = u
        .sets()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut r = vec![zero.clone(); cols + 1];
            for &j in s {
                r[j - 1] = one.clone();
            }
            r[m + i] = one.clone();
            r[cols] = one.clone();
            r
        })
        .collect();
    let mut basis: Vec<usize> = (m..m + n).collect();
    // reduced costs of the objective max sum v, stored as z - sum v = value
    let mut cost: Vec<BigRational> = (0..=cols).map(|j| if j < m { -one.clone() } else { zero.clone() }).collect();

    loop {
        let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, r) in rows.iter().enumerate() {
            if r[enter].is_positive() {
                let ratio = &r[cols] / &r[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave.expect("covering LP is bounded");
        let pivot = rows[pr][enter].clone();
        for v in rows[pr].iter_mut() {
            *v = &*v / &pivot;
        }
        let prow = rows[pr].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != pr && !r[enter].is_zero() {
                let f = r[enter].clone();
                for (v, p) in r.iter_mut().zip(&prow) {
                    *v = &*v - &f * p;
                }
            }
        }
        let f = cost[enter].clone();
        for (v, p) in cost.iter_mut().zip(&prow) {
            *v = &*v - &f * p;
        }
        basis[pr] = enter;
    }
    Ok(cost[cols].clone())
}

/// Renders a rational as "p/q", or "p" when integral.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
