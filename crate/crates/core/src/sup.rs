//! Uniform norms of Walsh series.
//!
//! A series splits into groups of terms with pairwise disjoint generator sets
//! (connected components of generator co-occurrence); the value set of the whole
//! series is the Minkowski sum of the component value sets. Each component is
//! enumerated with a Gray-code walk, reduced to its convex hull, and the largest
//! modulus on the Minkowski sum is read off by sweeping support directions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::dyadic::{GeneratorId, WalshSeries};
use crate::error::{Error, Result};
use crate::rng::case_rng;

pub const DEFAULT_BIT_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SupMode {
    /// Exhaustive enumeration; `bit_cap` bounds the generators per component.
    Exact { bit_cap: usize },
    /// Random sign vectors give the lower bound, the l1 spectral norm the upper.
    Sampled { samples: usize, seed: u64 },
}

impl SupMode {
    pub fn exact() -> Self {
        SupMode::Exact { bit_cap: DEFAULT_BIT_CAP }
    }
}

/// Bounds on the sup of the function represented by a series, i.e. the stored
/// terms plus at most `dropped_l1` of ledgered mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn sup_norm(f: &WalshSeries, mode: SupMode) -> Result<SupBounds> {
    let slack = f.dropped_l1();
    match mode {
        SupMode::Exact { bit_cap } => {
            let v = exact_sup_stored(f, bit_cap)?;
            Ok(SupBounds {
                lower: (v - slack).max(0.0),
                upper: v + slack,
            })
        }
        SupMode::Sampled { samples, seed } => {
            let gens = f.active_generators();
            let index: BTreeMap<GeneratorId, usize> = gens.iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let terms: Vec<(Vec<usize>, Complex64)> = f
                .terms()
                .map(|(w, c)| (w.gens().iter().map(|g| index[g]).collect(), *c))
                .collect();
            let mut rng = case_rng(seed, 0);
            let mut best = 0.0f64;
            let mut signs = vec![1.0f64; gens.len()];
            for _ in 0..samples.max(1) {
                for s in signs.iter_mut() {
                    *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
                let v: Complex64 = terms
                    .iter()
                    .map(|(idx, c)| c * idx.iter().map(|&i| signs[i]).product::<f64>())
                    .sum();
                best = best.max(v.norm());
            }
            Ok(SupBounds {
                lower: (best - slack).max(0.0),
                upper: f.l1_norm() + slack,
            })
        }
    }
}

/// Groups the non-identity terms by connected components of shared generators.
/// Returns the constant term and, per component, its generators and terms as
/// (bit mask over those generators, coefficient).
pub(crate) fn components(f: &WalshSeries) -> (Complex64, Vec<(Vec<GeneratorId>, Vec<(u64, Complex64)>)>) {
    let gens = f.active_generators();
    let index: BTreeMap<GeneratorId, usize> = gens.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut parent: Vec<usize> = (0..gens.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut constant = Complex64::new(0.0, 0.0);
    for (w, c) in f.terms() {
        if w.is_identity() {
            constant += c;
            continue;
        }
        let first = index[&w.gens()[0]];
        for g in &w.gens()[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, index[g]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut by_root: BTreeMap<usize, (Vec<GeneratorId>, Vec<(Vec<usize>, Complex64)>)> = BTreeMap::new();
    for (i, &g) in gens.iter().enumerate() {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().0.push(g);
    }
    for (w, c) in f.terms() {
        if w.is_identity() {
            continue;
        }
        let r = find(&mut parent, index[&w.gens()[0]]);
        by_root.get_mut(&r).unwrap().1.push((w.gens().iter().map(|g| index[g]).collect(), *c));
    }
    let comps = by_root
        .into_values()
        .map(|(cg, terms)| {
            let local: BTreeMap<GeneratorId, usize> = cg.iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let terms = terms
                .into_iter()
                .map(|(idx, c)| {
                    let mask = idx.iter().fold(0u64, |m, &i| m | 1u64 << local[&gens[i]]);
                    (mask, c)
                })
                .collect();
            (cg, terms)
        })
        .collect();
    (constant, comps)
}

/// All 2^m values of sum_t c_t (-1)^{|mask_t & state|}, indexed by `state`.
pub(crate) fn gray_values(bits: usize, terms: &[(u64, Complex64)]) -> Vec<Complex64> {
    const RESYNC: usize = 1024;
    let n = 1usize << bits;
    let mut by_bit: Vec<Vec<usize>> = vec![Vec::new(); bits];
    for (t, (mask, _)) in terms.iter().enumerate() {
        for (b, list) in by_bit.iter_mut().enumerate() {
            if mask >> b & 1 == 1 {
                list.push(t);
            }
        }
    }
    let mut signs = vec![1.0f64; terms.len()];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut state = 0u64;
    let mut value: Complex64 = terms.iter().map(|(_, c)| c).sum();
    out[0] = value;
    for i in 1..n {
        let b = i.trailing_zeros() as usize;
        state ^= 1u64 << b;
        for &t in &by_bit[b] {
            value -= 2.0 * signs[t] * terms[t].1;
            signs[t] = -signs[t];
        }
        if i % RESYNC == 0 {
            value = terms.iter().zip(&signs).map(|((_, c), s)| c * s).sum();
        }
        out[state as usize] = value;
    }
    out
}

fn exact_sup_stored(f: &WalshSeries, bit_cap: usize) -> Result<f64> {
    let (constant, comps) = components(f);
    let mut hulls: Vec<Vec<(f64, f64)>> = Vec::with_capacity(comps.len());
    for (gens, terms) in &comps {
        if gens.len() > bit_cap || gens.len() > 40 {
            return Err(Error::CapExceeded {
                what: "exact sup",
                needed: gens.len(),
                cap: bit_cap,
            });
        }
        let pts: Vec<(f64, f64)> = gray_values(gens.len(), terms).into_iter().map(|z| (z.re, z.im)).collect();
        hulls.push(convex_hull(pts));
    }
    Ok(minkowski_max_modulus((constant.re, constant.im), &hulls))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; counter-clockwise, collinear points removed.
pub(crate) fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// max |p| over offset + hull_1 + ... + hull_k (Minkowski sum of convex sets).
fn minkowski_max_modulus(offset: (f64, f64), hulls: &[Vec<(f64, f64)>]) -> f64 {
    let mut angles: Vec<f64> = Vec::new();
    let mut fixed = offset;
    for h in hulls {
        if h.len() == 1 {
            fixed.0 += h[0].0;
            fixed.1 += h[0].1;
            continue;
        }
        for k in 0..h.len() {
            let (a, b) = (h[k], h[(k + 1) % h.len()]);
            // outward normal of edge a->b of a counter-clockwise polygon is (dy, -dx)
            angles.push(wrap_angle((a.0 - b.0).atan2(b.1 - a.1)));
        }
    }
    if angles.is_empty() {
        return fixed.0.hypot(fixed.1);
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup();
    let mut best = 0.0f64;
    for k in 0..angles.len() {
        let next = if k + 1 < angles.len() {
            angles[k + 1]
        } else {
            angles[0] + 2.0 * PI
        };
        let mid = 0.5 * (angles[k] + next);
        let (ux, uy) = (mid.cos(), mid.sin());
        let mut s = fixed;
        for h in hulls.iter().filter(|h| h.len() > 1) {
            let v = h
                .iter()
                .copied()
                .max_by(|p, q| (p.0 * ux + p.1 * uy).partial_cmp(&(q.0 * ux + q.1 * uy)).unwrap())
                .unwrap();
            s.0 += v.0;
            s.1 += v.1;
        }
        best = best.max(s.0.hypot(s.1));
    }
    best
}

/// Maps an atan2 result into [-pi, pi).
fn wrap_angle(a: f64) -> f64 {
    if a >= PI {
        a - 2.0 * PI
    } else {
        a
    }
}
