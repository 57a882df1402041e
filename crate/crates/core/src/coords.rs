use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Finitely supported vector indexed by coordinate keys. Zero entries are not stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoordVector {
    entries: BTreeMap<u64, Complex64>,
}

impl CoordVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_complex<I: IntoIterator<Item = (u64, Complex64)>>(it: I) -> Self {
        let mut v = Self::new();
        for (k, z) in it {
            v.add(k, z);
        }
        v
    }

    pub fn from_real<I: IntoIterator<Item = (u64, f64)>>(it: I) -> Self {
        Self::from_complex(it.into_iter().map(|(k, r)| (k, Complex64::new(r, 0.0))))
    }

    /// Keys 0..n.
    pub fn from_dense(xs: &[f64]) -> Self {
        Self::from_real(xs.iter().enumerate().map(|(i, &r)| (i as u64, r)))
    }

    pub fn from_dense_complex(xs: &[Complex64]) -> Self {
        Self::from_complex(xs.iter().enumerate().map(|(i, &z)| (i as u64, z)))
    }

    pub fn unit(key: u64) -> Self {
        Self::from_real([(key, 1.0)])
    }

    pub fn add(&mut self, key: u64, z: Complex64) {
        let e = self.entries.entry(key).or_default();
        *e += z;
        if *e == Complex64::new(0.0, 0.0) {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, key: u64) -> Complex64 {
        self.entries.get(&key).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &z)| (k, z))
    }

    /// Number of nonzero entries.
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.entries.values().all(|z| z.im == 0.0)
    }

    pub fn re(&self) -> CoordVector {
        Self::from_real(self.iter().map(|(k, z)| (k, z.re)))
    }

    pub fn im(&self) -> CoordVector {
        Self::from_real(self.iter().map(|(k, z)| (k, z.im)))
    }

    pub fn conj(&self) -> CoordVector {
        Self::from_complex(self.iter().map(|(k, z)| (k, z.conj())))
    }

    pub fn scale(&self, s: Complex64) -> CoordVector {
        Self::from_complex(self.iter().map(|(k, z)| (k, s * z)))
    }

    pub fn scale_real(&self, s: f64) -> CoordVector {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn sub(&self, other: &CoordVector) -> CoordVector {
        let mut out = self.clone();
        for (k, z) in other.iter() {
            out.add(k, -z);
        }
        out
    }

    pub fn norm_l1(&self) -> f64 {
        self.entries.values().map(|z| z.norm()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.entries.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.entries.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// l^p norm for p in [1, inf]; `f64::INFINITY` selects the sup norm.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_linf();
        }
        if p == 1.0 {
            return self.norm_l1();
        }
        if p == 2.0 {
            return self.norm_l2();
        }
        // scale by the largest entry to avoid overflow for large p
        let m = self.norm_linf();
        if m == 0.0 {
            return 0.0;
        }
        m * self.entries.values().map(|z| (z.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }

    /// sum_k x(k) conj(y(k)).
    pub fn dot(&self, y: &CoordVector) -> Complex64 {
        self.iter().map(|(k, z)| z * y.get(k).conj()).sum()
    }

    /// sum_k x(k) y(k).
    pub fn bilinear(&self, y: &CoordVector) -> Complex64 {
        self.iter().map(|(k, z)| z * y.get(k)).sum()
    }
}
