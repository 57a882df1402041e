use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub const DEFAULT_PSI_WORK_CAP: u128 = 1 << 26;

/// A finite point set F inside E_1 x ... x E_d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    ground: Vec<Vec<u64>>,
    points: Vec<Vec<u64>>,
}

impl PointSet {
    pub fn new(ground: Vec<Vec<u64>>, points: Vec<Vec<u64>>) -> Result<Self> {
        if ground.is_empty() {
            return Err(Error::InvalidArgument("need at least one factor".into()));
        }
        let ground: Vec<Vec<u64>> = ground
            .into_iter()
            .map(|e| e.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        let mut uniq = BTreeSet::new();
        for p in &points {
            if p.len() != ground.len() {
                return Err(Error::InvalidArgument(format!("point {p:?} has the wrong arity")));
            }
            if let Some((i, v)) = p.iter().enumerate().find(|(i, v)| ground[*i].binary_search(v).is_err()) {
                return Err(Error::InvalidArgument(format!("coordinate {} of {p:?} ({v}) is outside E_{}", i + 1, i + 1)));
            }
            uniq.insert(p.clone());
        }
        Ok(PointSet {
            ground,
            points: uniq.into_iter().collect(),
        })
    }

    /// Points whose coordinates all lie in the ground sets.
    pub fn from_points(points: Vec<Vec<u64>>) -> Result<Self> {
        let d = points.first().map_or(0, |p| p.len());
        let ground = (0..d).map(|i| points.iter().filter_map(|p| p.get(i).copied()).collect()).collect();
        Self::new(ground, points)
    }

    pub fn dimension(&self) -> usize {
        self.ground.len()
    }

    pub fn ground(&self) -> &[Vec<u64>] {
        &self.ground
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Pair (a, b) of an alphabet of size k, as one element id.
fn pair_id(a: u64, b: u64, k: u64) -> u64 {
    a * k + b
}

/// {((a,b),(b,c),(a,c)) : a,b,c in A} with |A| = k, inside (A^2)^3.
pub fn three_halves_product(k: u64) -> PointSet {
    let e: Vec<u64> = (0..k * k).collect();
    let mut points = Vec::new();
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                points.push(vec![pair_id(a, b, k), pair_id(b, c, k), pair_id(a, c, k)]);
            }
        }
    }
    PointSet::new(vec![e.clone(), e.clone(), e], points).expect("well-formed")
}

/// The subsets B^2 of A^2 for B = {0..sub-1}: the witness of the 3/2-product.
pub fn three_halves_witness(k: u64, sub: u64) -> Vec<Vec<u64>> {
    let b2: Vec<u64> = (0..sub).flat_map(|a| (0..sub).map(move |b| pair_id(a, b, k))).collect();
    vec![b2.clone(), b2.clone(), b2]
}

/// |F intersected with A_1 x ... x A_d|.
pub fn psi_witness(f: &PointSet, subsets: &[Vec<u64>]) -> Result<usize> {
    if subsets.len() != f.dimension() {
        return Err(Error::InvalidArgument("one subset per factor".into()));
    }
    let sets: Vec<BTreeSet<u64>> = subsets.iter().map(|s| s.iter().copied().collect()).collect();
    Ok(f.points.iter().filter(|p| p.iter().zip(&sets).all(|(v, s)| s.contains(v))).count())
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Psi_F(s): max |F intersected with A_1 x ... x A_d| over A_i in E_i with |A_i| <= s,
/// exhaustive over the first d-1 factors (the last is chosen greedily, which is
/// optimal once the others are fixed).
pub fn psi_gauge(f: &PointSet, s: usize) -> Result<usize> {
    psi_gauge_capped(f, s, DEFAULT_PSI_WORK_CAP)
}

pub fn psi_gauge_capped(f: &PointSet, s: usize, work_cap: u128) -> Result<usize> {
    let d = f.dimension();
    let work = f.ground[..d - 1]
        .iter()
        .map(|e| binomial(e.len(), s.min(e.len())))
        .fold(1u128, |a, b| a.saturating_mul(b))
        .saturating_mul(f.points.len().max(1) as u128);
    if work > work_cap {
        return Err(Error::WorkCap {
            what: "psi exhaustive search",
            needed: work,
            cap: work_cap,
        });
    }
    let mut best = 0;
    let mut idx = vec![0usize; d - 1];
    let lens: Vec<usize> = f.ground[..d - 1].iter().map(|e| binomial(e.len(), s.min(e.len())) as usize).collect();
    loop {
        let chosen: Vec<BTreeSet<u64>> = (0..d - 1).map(|i| nth_subset(&f.ground[i], s.min(f.ground[i].len()), idx[i])).collect();
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for p in &f.points {
            if p[..d - 1].iter().zip(&chosen).all(|(v, c)| c.contains(v)) {
                *counts.entry(p[d - 1]).or_default() += 1;
            }
        }
        let mut c: Vec<usize> = counts.into_values().collect();
        c.sort_unstable_by(|a, b| b.cmp(a));
        best = best.max(c.iter().take(s).sum());
        // odometer
        let mut i = 0;
        loop {
            if i == d - 1 {
                return Ok(best);
            }
            idx[i] += 1;
            if idx[i] < lens[i] {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// The `n`-th k-subset of `e` in colexicographic order (combinatorial number system).
fn nth_subset(e: &[u64], k: usize, mut n: usize) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for r in (1..=k).rev() {
        // largest c with C(c, r) <= n
        let mut c = r - 1;
        while binomial(c + 1, r) as usize <= n {
            c += 1;
        }
        n -= binomial(c, r) as usize;
        out.insert(e[c]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_all() {
        let e: Vec<u64> = (10..16).collect();
        let all: BTreeSet<Vec<u64>> = (0..binomial(6, 3) as usize)
            .map(|n| nth_subset(&e, 3, n).into_iter().collect())
            .collect();
        assert_eq!(all.len(), 20);
        assert!(all.iter().all(|s| s.len() == 3));
    }

    #[test]
    fn three_halves_witness_reaches_k_cubed() {
        for k in [2u64, 3] {
            let f = three_halves_product(k);
            assert_eq!(f.len() as u64, k * k * k);
            assert_eq!(psi_witness(&f, &three_halves_witness(k, k)).unwrap() as u64, k * k * k);
        }
        // within a larger alphabet, B = {0, 1} gives 8 points on 4-element sets
        let f = three_halves_product(3);
        assert_eq!(psi_witness(&f, &three_halves_witness(3, 2)).unwrap(), 8);
    }

    #[test]
    fn exhaustive_three_halves() {
        let f = three_halves_product(3);
        assert_eq!(psi_gauge(&f, 4).unwrap(), 8);
        assert_eq!(psi_gauge(&three_halves_product(2), 4).unwrap(), 8);
    }

    #[test]
    fn full_product_and_diagonal() {
        let e: Vec<u64> = (0..5).collect();
        let full: Vec<Vec<u64>> = e.iter().flat_map(|&a| e.iter().map(move |&b| vec![a, b])).collect();
        let f = PointSet::new(vec![e.clone(), e.clone()], full).unwrap();
        let diag = PointSet::new(vec![e.clone(), e.clone()], e.iter().map(|&a| vec![a, a]).collect()).unwrap();
        for s in 1..=5 {
            assert_eq!(psi_gauge(&f, s).unwrap(), s * s);
            assert_eq!(psi_gauge(&diag, s).unwrap(), s);
        }
    }

    #[test]
    fn monotone_in_s() {
        let f = three_halves_product(3);
        let vals: Vec<usize> = (1..=5).map(|s| psi_gauge(&f, s).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
    }

    #[test]
    fn work_cap() {
        let f = three_halves_product(3);
        assert!(matches!(psi_gauge_capped(&f, 4, 100), Err(Error::WorkCap { .. })));
    }
}
