//! Sparse Walsh series on the dyadic group {-1,1}^A.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorId(pub u32);

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// A Walsh character: a finite sorted set of generators. The empty set is the
/// identity character.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Character(Vec<GeneratorId>);

impl Character {
    pub fn identity() -> Self {
        Character(Vec::new())
    }

    pub fn singleton(g: GeneratorId) -> Self {
        Character(vec![g])
    }

    /// Builds the product of the given generators; repeated generators cancel.
    pub fn from_gens<I: IntoIterator<Item = GeneratorId>>(gens: I) -> Self {
        let mut v: Vec<GeneratorId> = gens.into_iter().collect();
        v.sort_unstable();
        let mut out: Vec<GeneratorId> = Vec::with_capacity(v.len());
        for g in v {
            if out.last() == Some(&g) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        Character(out)
    }

    /// Caller guarantees `gens` is strictly increasing.
    pub(crate) fn from_sorted(gens: Vec<GeneratorId>) -> Self {
        debug_assert!(gens.windows(2).all(|w| w[0] < w[1]));
        Character(gens)
    }

    pub fn gens(&self) -> &[GeneratorId] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, g: GeneratorId) -> bool {
        self.0.binary_search(&g).is_ok()
    }

    /// Value of the character at a sign vector: the product of the signs.
    pub fn eval(&self, omega: &SignVector) -> i8 {
        self.0.iter().fold(1i8, |acc, &g| acc * omega.get(g))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "r0");
        }
        let ids: Vec<String> = self.0.iter().map(|g| g.0.to_string()).collect();
        write!(f, "r{{{}}}", ids.join(","))
    }
}

/// Group product of characters (symmetric difference of generator sets).
pub fn char_mul(a: &Character, b: &Character) -> Character {
    let (x, y) = (&a.0, &b.0);
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => {
                out.push(x[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(y[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&x[i..]);
    out.extend_from_slice(&y[j..]);
    Character(out)
}

impl std::ops::Mul for &Character {
    type Output = Character;
    fn mul(self, rhs: &Character) -> Character {
        char_mul(self, rhs)
    }
}

/// A point of {-1,1}^A; unlisted generators are +1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignVector {
    minus: BTreeSet<GeneratorId>,
}

impl SignVector {
    pub fn all_plus() -> Self {
        Self::default()
    }

    pub fn set(&mut self, g: GeneratorId, sign: i8) {
        if sign < 0 {
            self.minus.insert(g);
        } else {
            self.minus.remove(&g);
        }
    }

    pub fn with(mut self, g: GeneratorId, sign: i8) -> Self {
        self.set(g, sign);
        self
    }

    pub fn get(&self, g: GeneratorId) -> i8 {
        if self.minus.contains(&g) {
            -1
        } else {
            1
        }
    }

    /// Sign vector over `gens` whose bit `b` of `mask` set means generator `gens[b]` is -1.
    pub fn from_mask(gens: &[GeneratorId], mask: u64) -> Self {
        let mut s = Self::default();
        for (b, &g) in gens.iter().enumerate() {
            if mask >> b & 1 == 1 {
                s.minus.insert(g);
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub u64);

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

/// Generator registry shared by every series in one computation.
///
/// Block 0 holds the images of original coordinates; block `j >= 1` holds the
/// fresh generators assigned to odd characters of order >= 3 over block `j - 1`.
#[derive(Debug)]
pub struct Session {
    id: SessionId,
    next_id: u32,
    blocks: Vec<Vec<GeneratorId>>,
    level_of: Vec<u32>,
    coord_memo: HashMap<u64, GeneratorId>,
    tau_memo: HashMap<(usize, Character), GeneratorId>,
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

impl Session {
    pub fn new() -> Self {
        Session {
            id: SessionId(NEXT_SESSION.fetch_add(1, Ordering::Relaxed)),
            next_id: 0,
            blocks: Vec::new(),
            level_of: Vec::new(),
            coord_memo: HashMap::new(),
            tau_memo: HashMap::new(),
        }
    }

    pub fn id(&self) -> SessionId {
        self.id
    }

    fn fresh(&mut self, block: usize) -> GeneratorId {
        let g = GeneratorId(self.next_id);
        self.next_id = self.next_id.checked_add(1).expect("generator ids exhausted");
        while self.blocks.len() <= block {
            self.blocks.push(Vec::new());
        }
        self.blocks[block].push(g);
        self.level_of.push(block as u32);
        g
    }

    /// Generator of an original coordinate (the first-level bijection).
    pub fn coord(&mut self, key: u64) -> GeneratorId {
        if let Some(&g) = self.coord_memo.get(&key) {
            return g;
        }
        let g = self.fresh(0);
        self.coord_memo.insert(key, g);
        g
    }

    /// Looks up a coordinate generator without allocating.
    pub fn coord_lookup(&self, key: u64) -> Option<GeneratorId> {
        self.coord_memo.get(&key).copied()
    }

    /// Fresh generator in block `level` standing for the odd character `w`
    /// (order >= 3) over block `level - 1`. Memoized.
    pub fn tau(&mut self, level: usize, w: &Character) -> Result<GeneratorId> {
        if level == 0 {
            return Err(Error::InvalidArgument("tau level must be >= 1".into()));
        }
        if let Some(&g) = self.tau_memo.get(&(level, w.clone())) {
            return Ok(g);
        }
        if w.order() < 3 || w.order() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "tau expects an odd character of order >= 3, got order {}",
                w.order()
            )));
        }
        if let Some(&g) = w.gens().iter().find(|g| self.block_of(**g) != Some(level - 1)) {
            return Err(Error::InvalidArgument(format!(
                "generator {g} of {w} is not in block {}",
                level - 1
            )));
        }
        let g = self.fresh(level);
        self.tau_memo.insert((level, w.clone()), g);
        Ok(g)
    }

    pub fn block_of(&self, g: GeneratorId) -> Option<usize> {
        self.level_of.get(g.0 as usize).map(|&b| b as usize)
    }

    pub fn blocks(&self) -> &[Vec<GeneratorId>] {
        &self.blocks
    }

    pub fn generator_count(&self) -> usize {
        self.next_id as usize
    }
}

/// Sparse complex Walsh series tagged with its session, plus ledgers for the
/// l2 and l1 mass of coefficients that were pruned or never expanded.
#[derive(Clone, Debug, PartialEq)]
pub struct WalshSeries {
    session: SessionId,
    coeffs: BTreeMap<Character, Complex64>,
    dropped_l2: f64,
    dropped_l1: f64,
}

impl WalshSeries {
    pub fn new(session: SessionId) -> Self {
        WalshSeries {
            session,
            coeffs: BTreeMap::new(),
            dropped_l2: 0.0,
            dropped_l1: 0.0,
        }
    }

    /// Sums duplicate characters; exact zeros are not stored.
    pub fn from_terms<I>(session: SessionId, terms: I) -> Self
    where
        I: IntoIterator<Item = (Character, Complex64)>,
    {
        let mut s = Self::new(session);
        for (w, c) in terms {
            s.add_term(w, c);
        }
        s.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        s
    }

    pub(crate) fn add_term(&mut self, w: Character, c: Complex64) {
        *self.coeffs.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn with_ledger(mut self, dropped_l2: f64, dropped_l1: f64) -> Self {
        assert!(dropped_l2 >= 0.0 && dropped_l1 >= 0.0);
        self.dropped_l2 = dropped_l2;
        self.dropped_l1 = dropped_l1;
        self
    }

    pub fn session(&self) -> SessionId {
        self.session
    }

    pub fn coeff(&self, w: &Character) -> Complex64 {
        self.coeffs.get(w).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Character, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn dropped_l2(&self) -> f64 {
        self.dropped_l2
    }

    pub fn dropped_l1(&self) -> f64 {
        self.dropped_l1
    }

    pub fn is_exact(&self) -> bool {
        self.dropped_l2 == 0.0 && self.dropped_l1 == 0.0
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn active_generators(&self) -> Vec<GeneratorId> {
        let set: BTreeSet<GeneratorId> = self.coeffs.keys().flat_map(|w| w.gens().iter().copied()).collect();
        set.into_iter().collect()
    }

    pub fn scaled(&self, s: Complex64) -> WalshSeries {
        series_linear(&[(s, self)]).expect("single operand")
    }
}

fn check_same(a: SessionId, b: SessionId) -> Result<()> {
    if a != b {
        return Err(Error::SessionMismatch(a.0, b.0));
    }
    Ok(())
}

/// Coefficientwise linear combination. An empty operand list is rejected since
/// the result would have no session.
pub fn series_linear(ops: &[(Complex64, &WalshSeries)]) -> Result<WalshSeries> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidArgument("series_linear needs at least one operand".into()))?;
    let session = first.1.session;
    let mut out = WalshSeries::new(session);
    for (s, f) in ops {
        check_same(session, f.session)?;
        for (w, c) in &f.coeffs {
            out.add_term(w.clone(), s * c);
        }
        out.dropped_l2 += s.norm() * f.dropped_l2;
        out.dropped_l1 += s.norm() * f.dropped_l1;
    }
    out.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    Ok(out)
}

/// Pointwise product. Coefficients below `prune_eps` in modulus are dropped
/// into the ledgers; operand ledgers propagate through the standard bounds
/// ||e_f g||_2 <= ||e_f||_2 ||g||_inf <= ||e_f||_2 ||g^||_1.
pub fn series_mul(f: &WalshSeries, g: &WalshSeries, prune_eps: f64) -> Result<WalshSeries> {
    check_same(f.session, g.session)?;
    if !(prune_eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("prune_eps must be >= 0, got {prune_eps}")));
    }
    let mut acc: BTreeMap<Character, Complex64> = BTreeMap::new();
    for (w1, c1) in &f.coeffs {
        for (w2, c2) in &g.coeffs {
            *acc.entry(char_mul(w1, w2)).or_default() += c1 * c2;
        }
    }
    let (f1, g1) = (f.l1_norm(), g.l1_norm());
    let mut d2 = g1 * f.dropped_l2 + f1 * g.dropped_l2 + f.dropped_l1 * g.dropped_l2;
    let mut d1 = g1 * f.dropped_l1 + f1 * g.dropped_l1 + f.dropped_l1 * g.dropped_l1;
    let mut pruned_sq = 0.0;
    let mut out = WalshSeries::new(f.session);
    for (w, c) in acc {
        let m = c.norm();
        if m == 0.0 {
            continue;
        }
        if m < prune_eps {
            pruned_sq += m * m;
            d1 += m;
        } else {
            out.coeffs.insert(w, c);
        }
    }
    d2 += pruned_sq.sqrt();
    out.dropped_l2 = d2;
    out.dropped_l1 = d1;
    Ok(out)
}

pub fn evaluate(f: &WalshSeries, omega: &SignVector) -> Complex64 {
    f.coeffs.iter().map(|(w, c)| c * f64::from(w.eval(omega))).sum()
}

/// Spectral pairing sum_w f^(w) g^(w), bilinear (characters are real).
pub fn parseval_pair(f: &WalshSeries, g: &WalshSeries) -> Result<Complex64> {
    check_same(f.session, g.session)?;
    let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    Ok(small
        .coeffs
        .iter()
        .filter_map(|(w, c)| large.coeffs.get(w).map(|d| c * d))
        .sum())
}

/// Sum of |f^(w) g^(w)| over shared characters; used to size roundoff allowances.
pub fn pairing_abs_mass(f: &WalshSeries, g: &WalshSeries) -> f64 {
    let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    small
        .coeffs
        .iter()
        .filter_map(|(w, c)| large.coeffs.get(w).map(|d| c.norm() * d.norm()))
        .sum()
}

pub fn conj_series(f: &WalshSeries) -> WalshSeries {
    WalshSeries {
        session: f.session,
        coeffs: f.coeffs.iter().map(|(w, c)| (w.clone(), c.conj())).collect(),
        dropped_l2: f.dropped_l2,
        dropped_l1: f.dropped_l1,
    }
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    gens: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesWire {
    session: u64,
    terms: Vec<TermWire>,
    dropped_l2: f64,
    dropped_l1: f64,
}

impl Serialize for WalshSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesWire {
            session: self.session.0,
            terms: self
                .coeffs
                .iter()
                .map(|(w, c)| TermWire {
                    gens: w.gens().iter().map(|g| g.0).collect(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
            dropped_l2: self.dropped_l2,
            dropped_l1: self.dropped_l1,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WalshSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SeriesWire::deserialize(d)?;
        if !(wire.dropped_l2 >= 0.0 && wire.dropped_l1 >= 0.0) {
            return Err(serde::de::Error::custom("ledgers must be non-negative"));
        }
        let terms = wire.terms.into_iter().map(|t| {
            (
                Character::from_gens(t.gens.into_iter().map(GeneratorId)),
                Complex64::new(t.re, t.im),
            )
        });
        Ok(WalshSeries::from_terms(SessionId(wire.session), terms).with_ledger(wire.dropped_l2, wire.dropped_l1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(i: u32) -> GeneratorId {
        GeneratorId(i)
    }

    fn ch(ids: &[u32]) -> Character {
        Character::from_gens(ids.iter().map(|&i| g(i)))
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn char_mul_examples() {
        assert_eq!(char_mul(&ch(&[1, 2]), &ch(&[2, 3])), ch(&[1, 3]));
        assert_eq!(char_mul(&ch(&[4, 7, 9]), &ch(&[4, 7, 9])), Character::identity());
        assert_eq!(char_mul(&Character::identity(), &ch(&[5])), ch(&[5]));
        assert_eq!(ch(&[3, 1, 3, 2]), ch(&[1, 2]));
    }

    #[test]
    fn linear_examples() {
        let s = SessionId(99);
        let r1 = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0))]);
        let two = series_linear(&[(c(1.0), &r1), (c(1.0), &r1)]).unwrap();
        assert_eq!(two.coeff(&ch(&[1])), c(2.0));
        let f = WalshSeries::from_terms(s, [(ch(&[1]), c(0.3)), (ch(&[2, 5]), Complex64::new(0.1, -2.0))]);
        assert!(series_linear(&[(c(1.0), &f), (c(-1.0), &f)]).unwrap().is_empty());
        let r12 = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0)), (ch(&[2]), c(1.0))]);
        let i = Complex64::i();
        let ir = series_linear(&[(i, &r12)]).unwrap();
        assert_eq!(ir.coeff(&ch(&[1])), i);
        assert_eq!(ir.coeff(&ch(&[2])), i);
        let other = WalshSeries::new(SessionId(100));
        assert_eq!(
            series_linear(&[(c(1.0), &r1), (c(1.0), &other)]),
            Err(Error::SessionMismatch(99, 100))
        );
    }

    #[test]
    fn mul_examples() {
        let s = SessionId(7);
        let r1 = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0))]);
        let r2 = WalshSeries::from_terms(s, [(ch(&[2]), c(1.0))]);
        let p = series_mul(&r1, &r2, 0.0).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&ch(&[1, 2])), c(1.0));

        let a = WalshSeries::from_terms(s, [(ch(&[]), c(1.0)), (ch(&[1]), c(1.0))]);
        let b = WalshSeries::from_terms(s, [(ch(&[]), c(1.0)), (ch(&[1]), c(-1.0))]);
        assert!(series_mul(&a, &b, 0.0).unwrap().is_empty());

        let f = WalshSeries::from_terms(s, [(ch(&[1]), c(0.6)), (ch(&[2]), c(0.8))]);
        let sq = series_mul(&f, &f, 0.0).unwrap();
        assert_eq!(sq.len(), 2);
        assert!((sq.coeff(&ch(&[])).re - 1.0).abs() < 1e-15);
        assert!((sq.coeff(&ch(&[1, 2])).re - 0.96).abs() < 1e-15);
    }

    #[test]
    fn mul_prunes_into_ledger() {
        let s = SessionId(7);
        let f = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0)), (ch(&[2]), c(1e-6))]);
        let p = series_mul(&f, &f, 1e-5).unwrap();
        // 1 + 2e-6 r1r2 + 1e-12 r0: r1r2 (2e-6) is pruned
        assert_eq!(p.len(), 1);
        assert!((p.coeff(&ch(&[])).re - (1.0 + 1e-12)).abs() < 1e-15);
        assert!((p.dropped_l2() - 2e-6).abs() < 1e-18);
        assert!((p.dropped_l1() - 2e-6).abs() < 1e-18);
    }

    #[test]
    fn evaluate_examples() {
        let s = SessionId(1);
        let r1 = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0))]);
        assert_eq!(evaluate(&r1, &SignVector::all_plus().with(g(1), -1)), c(-1.0));
        let f = WalshSeries::from_terms(s, [(ch(&[]), c(1.0)), (ch(&[1, 2]), c(1.0))]);
        assert_eq!(evaluate(&f, &SignVector::all_plus()), c(2.0));
        let h = WalshSeries::from_terms(s, [(ch(&[1]), c(0.6)), (ch(&[2]), c(0.8))]);
        let v = evaluate(&h, &SignVector::all_plus().with(g(2), -1));
        assert!((v.re + 0.2).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn pairing_examples() {
        let s = SessionId(3);
        let r1 = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0))]);
        let r2 = WalshSeries::from_terms(s, [(ch(&[2]), c(1.0))]);
        assert_eq!(parseval_pair(&r1, &r1).unwrap(), c(1.0));
        assert_eq!(parseval_pair(&r1, &r2).unwrap(), c(0.0));
        let f = WalshSeries::from_terms(s, [(ch(&[1]), c(0.6)), (ch(&[2]), c(0.8))]);
        let h = WalshSeries::from_terms(s, [(ch(&[1]), c(0.6)), (ch(&[2]), c(-0.8))]);
        assert!((parseval_pair(&f, &h).unwrap().re + 0.28).abs() < 1e-15);
        let foreign = WalshSeries::from_terms(SessionId(4), [(ch(&[1]), c(1.0))]);
        assert_eq!(parseval_pair(&r1, &foreign), Err(Error::SessionMismatch(3, 4)));
    }

    #[test]
    fn pairing_has_no_conjugation() {
        let s = SessionId(3);
        let f = WalshSeries::from_terms(s, [(ch(&[1]), Complex64::i())]);
        assert_eq!(parseval_pair(&f, &f).unwrap(), c(-1.0));
        assert_eq!(parseval_pair(&f, &conj_series(&f)).unwrap(), c(1.0));
    }

    #[test]
    fn conj_examples() {
        let s = SessionId(3);
        let f = WalshSeries::from_terms(s, [(ch(&[1]), Complex64::i())]);
        assert_eq!(conj_series(&f).coeff(&ch(&[1])), -Complex64::i());
        let r1 = WalshSeries::from_terms(s, [(ch(&[1]), c(1.0))]);
        assert_eq!(conj_series(&r1), r1);
        let h = WalshSeries::from_terms(s, [(ch(&[1, 4]), Complex64::new(0.2, -0.7))]);
        assert_eq!(conj_series(&conj_series(&h)), h);
    }

    #[test]
    fn session_tau_is_memoized_and_blockwise() {
        let mut sess = Session::new();
        let a = sess.coord(10);
        let b = sess.coord(11);
        let cc = sess.coord(12);
        assert_eq!(sess.coord(10), a);
        let w = Character::from_gens([a, b, cc]);
        let t1 = sess.tau(1, &w).unwrap();
        assert_eq!(sess.tau(1, &w).unwrap(), t1);
        assert_eq!(sess.block_of(t1), Some(1));
        assert!(sess.tau(1, &Character::from_gens([a])).is_err());
        assert!(sess.tau(2, &w).is_err());
        let blocks = sess.blocks();
        assert_eq!(blocks[0], vec![a, b, cc]);
        assert_eq!(blocks[1], vec![t1]);
    }

    #[test]
    fn json_roundtrip() {
        let s = SessionId(42);
        let f = WalshSeries::from_terms(s, [(ch(&[1, 3]), Complex64::new(0.25, -1.5)), (ch(&[]), c(2.0))])
            .with_ledger(1e-9, 2e-9);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.starts_with("{\"session\":42,\"terms\":[{\"gens\":[],\"re\":2.0,\"im\":0.0}"));
        let back: WalshSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }
}
