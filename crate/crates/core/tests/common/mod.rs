#![allow(dead_code)]

use dyadic_grothendieck::CoordVector;
use num_complex::Complex64;
use rand::Rng;

/// Random real vector on keys 0..dim scaled to l^p norm `radius`.
pub fn real_vector<R: Rng>(rng: &mut R, dim: usize, p: f64, radius: f64) -> CoordVector {
    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = CoordVector::from_dense(&v);
    let n = x.norm_lp(p);
    if n == 0.0 {
        return x;
    }
    x.scale_real(radius / n)
}

/// Random complex vector on keys 0..dim scaled to l^p norm `radius`.
pub fn complex_vector<R: Rng>(rng: &mut R, dim: usize, p: f64, radius: f64) -> CoordVector {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let x = CoordVector::from_dense_complex(&v);
    let n = x.norm_lp(p);
    if n == 0.0 {
        return x;
    }
    x.scale_real(radius / n)
}

/// Random vector in the closed unit ball of l^p, real or complex at random.
pub fn ball_vector<R: Rng>(rng: &mut R, dim: usize, p: f64) -> CoordVector {
    let r = rng.gen_range(0.05..=1.0);
    if rng.gen::<bool>() {
        complex_vector(rng, dim, p, r)
    } else {
        real_vector(rng, dim, p, r)
    }
}
