//! Slice-iterated maps tabulated over their active generators, and the iterated
//! convolutions that pair such tables.
//!
//! A table for an argument over A^S (S sorted) is built stage by stage in
//! increasing coordinate order: stage 1 maps every slice along the smallest
//! coordinate into that coordinate's session, and each later stage maps, for every
//! sign assignment of the earlier slots, the resulting vector over the next
//! coordinate. A coordinate of incidence k uses the k-fold map, or the linear map
//! y -> sum_a y(a) r_a when k = 1.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::covering::CoveringSequence;
use super::eta::{eta_bruteforce, tuple_of_key, Theta};
use crate::constants::k_of_t;
use crate::coords::CoordVector;
use crate::dyadic::{Character, GeneratorId, Session, SessionId, WalshSeries};
use crate::error::{Error, Result};
use crate::phi::{build_phi_k, PhiConfig};

/// Cap on the total number of sign bits of one table.
pub const TABLE_BIT_CAP: usize = 24;
/// Default cap on the number of free sign bits summed over by `frac_convolution`.
pub const CONVOLUTION_BIT_CAP: usize = 24;

/// One session per coordinate 1..=m, shared by every argument of a verification.
#[derive(Debug)]
pub struct SlotRegistry {
    sessions: Vec<Session>,
}

impl SlotRegistry {
    pub fn new(m: usize) -> Self {
        SlotRegistry {
            sessions: (0..m).map(|_| Session::new()).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.sessions.len()
    }

    pub fn session(&self, coord: usize) -> &Session {
        &self.sessions[coord - 1]
    }

    pub fn session_mut(&mut self, coord: usize) -> &mut Session {
        &mut self.sessions[coord - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSlot {
    /// 1-based coordinate of the covering.
    pub coord: usize,
    pub session: SessionId,
    /// Bit b of this slot's mask set means `gens[b]` is -1.
    pub gens: Vec<GeneratorId>,
}

/// Dense values over the product of the slots' sign cubes. The index of an
/// assignment is the concatenation of slot masks, slot 0 in the lowest bits.
#[derive(Clone, Debug)]
pub struct SlotTable {
    slots: Vec<TableSlot>,
    values: Vec<Complex64>,
    exact: bool,
    sup_bound: f64,
}

impl SlotTable {
    pub fn new(slots: Vec<TableSlot>, values: Vec<Complex64>, exact: bool, sup_bound: f64) -> Result<Self> {
        let bits: usize = slots.iter().map(|s| s.gens.len()).sum();
        if bits > TABLE_BIT_CAP {
            return Err(Error::CapExceeded {
                what: "table sign bits",
                needed: bits,
                cap: TABLE_BIT_CAP,
            });
        }
        if values.len() != 1usize << bits {
            return Err(Error::InvalidArgument(format!("table over {bits} bits needs {} values", 1usize << bits)));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("table values must be finite".into()));
        }
        Ok(SlotTable {
            slots,
            values,
            exact,
            sup_bound,
        })
    }

    pub fn slots(&self) -> &[TableSlot] {
        &self.slots
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Whether every stage terminated without truncation.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// A priori bound on the sup of the table.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn bits(&self) -> usize {
        self.slots.iter().map(|s| s.gens.len()).sum()
    }

    /// Value at per-slot masks.
    pub fn get(&self, masks: &[u64]) -> Complex64 {
        let mut idx = 0u64;
        let mut shift = 0;
        for (s, m) in self.slots.iter().zip(masks) {
            idx |= m << shift;
            shift += s.gens.len();
        }
        self.values[idx as usize]
    }
}

/// Values of `f` at every sign assignment of `gens`.
fn tabulate(f: &WalshSeries, gens: &[GeneratorId]) -> Vec<Complex64> {
    let terms: Vec<(u64, Complex64)> = f
        .terms()
        .map(|(w, c)| {
            let mask = w.gens().iter().fold(0u64, |m, g| {
                m | 1 << gens.binary_search(g).expect("gens cover the series")
            });
            (mask, *c)
        })
        .collect();
    (0..1u64 << gens.len())
        .map(|omega| {
            terms
                .iter()
                .map(|(m, c)| if (m & omega).count_ones() % 2 == 0 { *c } else { -*c })
                .sum()
        })
        .collect()
}

/// Positions of `sub` inside the sorted `sup`.
fn positions(sub: &[GeneratorId], sup: &[GeneratorId]) -> Vec<usize> {
    sub.iter().map(|g| sup.binary_search(g).expect("subset")).collect()
}

fn project(mask: u64, pos: &[usize]) -> u64 {
    pos.iter().enumerate().fold(0u64, |acc, (b, &p)| acc | ((mask >> p) & 1) << b)
}

struct Stage {
    coord: usize,
    k: u32,
    real_inputs: bool,
}

struct Partial {
    gens: Vec<Vec<GeneratorId>>,
    values: Vec<Complex64>,
}

struct Builder<'a> {
    alphabet: usize,
    stages: Vec<Stage>,
    registry: &'a mut SlotRegistry,
    cfg: &'a PhiConfig,
    exact: bool,
}

impl Builder<'_> {
    fn stage_series(&mut self, s: usize, slice: &[Complex64]) -> Result<WalshSeries> {
        let y = CoordVector::from_dense_complex(slice);
        if !y.is_real() {
            self.stages[s].real_inputs = false;
        }
        let k = self.stages[s].k;
        let session = self.registry.session_mut(self.stages[s].coord);
        if k == 1 {
            let terms: Vec<(Character, Complex64)> =
                y.iter().map(|(key, z)| (Character::singleton(session.coord(key)), z)).collect();
            return Ok(WalshSeries::from_terms(session.id(), terms));
        }
        let phi = build_phi_k(&y, k, session, self.cfg)?;
        let cert = phi.certificate();
        self.exact &= cert.exact && cert.telescope_remainder == 0.0;
        Ok(phi.assembled())
    }

    /// Table of the remaining stages s.. for `values` over A^(l - s).
    fn build(&mut self, s: usize, values: &[Complex64]) -> Result<Partial> {
        let a = self.alphabet;
        let series: Vec<WalshSeries> = values
            .chunks(a)
            .map(|slice| self.stage_series(s, slice))
            .collect::<Result<_>>()?;
        let mut gens: Vec<GeneratorId> = series.iter().flat_map(|f| f.active_generators()).collect();
        gens.sort_unstable();
        gens.dedup();
        if gens.len() > self.cfg.bit_cap {
            return Err(Error::CapExceeded {
                what: "slot active generators",
                needed: gens.len(),
                cap: self.cfg.bit_cap,
            });
        }
        let evals: Vec<Vec<Complex64>> = series.iter().map(|f| tabulate(f, &gens)).collect();
        if s + 1 == self.stages.len() {
            return Ok(Partial {
                gens: vec![gens],
                values: evals.into_iter().next().expect("one slice at the last stage"),
            });
        }
        let width = gens.len();
        let subs: Vec<Partial> = (0..1usize << width)
            .map(|omega| {
                let y: Vec<Complex64> = evals.iter().map(|e| e[omega]).collect();
                self.build(s + 1, &y)
            })
            .collect::<Result<_>>()?;
        // union the later slots' generators and re-tabulate every sub-table on them
        let later = self.stages.len() - s - 1;
        let union: Vec<Vec<GeneratorId>> = (0..later)
            .map(|t| {
                let mut g: Vec<GeneratorId> = subs.iter().flat_map(|p| p.gens[t].iter().copied()).collect();
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        let total = width + union.iter().map(|g| g.len()).sum::<usize>();
        if total > TABLE_BIT_CAP {
            return Err(Error::CapExceeded {
                what: "table sign bits",
                needed: total,
                cap: TABLE_BIT_CAP,
            });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); 1usize << total];
        for (omega, sub) in subs.iter().enumerate() {
            let pos: Vec<Vec<usize>> = sub.gens.iter().zip(&union).map(|(h, g)| positions(h, g)).collect();
            for rest in 0..1u64 << (total - width) {
                let (mut src, mut src_shift, mut dst_shift) = (0u64, 0, 0);
                for (t, g) in union.iter().enumerate() {
                    let m = (rest >> dst_shift) & ((1u64 << g.len()) - 1);
                    src |= project(m, &pos[t]) << src_shift;
                    src_shift += sub.gens[t].len();
                    dst_shift += g.len();
                }
                values[omega | (rest << width) as usize] = sub.values[src as usize];
            }
        }
        let mut all = vec![gens];
        all.extend(union);
        Ok(Partial { gens: all, values })
    }
}

/// Tabulates the slice-iterated map of `x`, a vector over A^l keyed by
/// `tuple_key` of (alpha_{coords[0]}, ..., alpha_{coords[l-1]}). `coords` must be
/// strictly increasing; `k_tuple[s]` is the fold used at coordinate `coords[s]`.
pub fn build_phi_tuple(
    x: &CoordVector,
    alphabet: usize,
    coords: &[usize],
    k_tuple: &[u32],
    registry: &mut SlotRegistry,
    config: &PhiConfig,
) -> Result<SlotTable> {
    let l = coords.len();
    if l == 0 || k_tuple.len() != l {
        return Err(Error::InvalidArgument("coords and k_tuple must be non-empty and of equal length".into()));
    }
    if coords.windows(2).any(|w| w[0] >= w[1]) || coords[0] == 0 || coords[l - 1] > registry.m() {
        return Err(Error::InvalidArgument(format!("coords {coords:?} must increase within 1..={}", registry.m())));
    }
    if k_tuple.contains(&0) {
        return Err(Error::InvalidArgument("folds must be positive".into()));
    }
    let size = (alphabet as u128).pow(l as u32);
    if alphabet == 0 || size > 1 << TABLE_BIT_CAP {
        return Err(Error::InvalidArgument(format!("alphabet {alphabet} with {l} slots is out of range")));
    }
    let mut dense = vec![Complex64::new(0.0, 0.0); size as usize];
    for (key, z) in x.iter() {
        if key >= size as u64 {
            return Err(Error::InvalidArgument(format!("key {key} outside A^{l} with |A| = {alphabet}")));
        }
        dense[key as usize] = z;
    }
    let mut b = Builder {
        alphabet,
        stages: coords
            .iter()
            .zip(k_tuple)
            .map(|(&coord, &k)| Stage {
                coord,
                k,
                real_inputs: true,
            })
            .collect(),
        registry,
        cfg: config,
        exact: true,
    };
    let partial = b.build(0, &dense)?;
    let k1 = k_of_t(1.0);
    let sup_bound = b
        .stages
        .iter()
        .map(|st| match (st.k, st.real_inputs) {
            (1, _) => (alphabet as f64).sqrt(),
            (_, true) => k1,
            (_, false) => std::f64::consts::SQRT_2 * k1,
        })
        .product::<f64>()
        * x.norm_l2();
    let exact = b.exact;
    let slots = coords
        .iter()
        .zip(partial.gens)
        .map(|(&coord, gens)| TableSlot {
            coord,
            session: registry.session(coord).id(),
            gens,
        })
        .collect();
    SlotTable::new(slots, partial.values, exact, sup_bound)
}

/// Tables of every argument of U, each with folds given by the incidences.
pub fn build_tables(
    u: &CoveringSequence,
    args: &[CoordVector],
    alphabet: usize,
    registry: &mut SlotRegistry,
    config: &PhiConfig,
) -> Result<Vec<SlotTable>> {
    if args.len() != u.n() {
        return Err(Error::InvalidArgument(format!("{} arguments for {} sets", args.len(), u.n())));
    }
    if registry.m() != u.m() {
        return Err(Error::RegistryMismatch(format!("registry has {} sessions, covering has m = {}", registry.m(), u.m())));
    }
    let k = u.incidence();
    u.sets()
        .iter()
        .zip(args)
        .map(|(s, x)| {
            let folds: Vec<u32> = s.iter().map(|&j| k[j - 1] as u32).collect();
            build_phi_tuple(x, alphabet, s, &folds, registry, config)
        })
        .collect()
}

/// The iterated convolution of the tables along U, by direct summation with
/// the default cap on free bits.
pub fn frac_convolution(u: &CoveringSequence, tables: &[SlotTable]) -> Result<Complex64> {
    frac_convolution_capped(u, tables, CONVOLUTION_BIT_CAP)
}

/// For each coordinate j, integrates over k_j - 1 copies of its slot variable and
/// evaluates the last occurrence at their product (the identity when k_j = 1).
pub fn frac_convolution_capped(u: &CoveringSequence, tables: &[SlotTable], bit_cap: usize) -> Result<Complex64> {
    if tables.len() != u.n() {
        return Err(Error::RegistryMismatch(format!("{} tables for {} sets", tables.len(), u.n())));
    }
    let m = u.m();
    let mut session: Vec<Option<SessionId>> = vec![None; m];
    let mut union: Vec<Vec<GeneratorId>> = vec![Vec::new(); m];
    for (i, (t, s)) in tables.iter().zip(u.sets()).enumerate() {
        let coords: Vec<usize> = t.slots.iter().map(|sl| sl.coord).collect();
        if &coords != s {
            return Err(Error::RegistryMismatch(format!("table {} has slots {coords:?}, set is {s:?}", i + 1)));
        }
        for sl in &t.slots {
            match session[sl.coord - 1] {
                None => session[sl.coord - 1] = Some(sl.session),
                Some(id) if id != sl.session => {
                    return Err(Error::RegistryMismatch(format!(
                        "coordinate {} uses sessions {} and {}",
                        sl.coord, id.0, sl.session.0
                    )))
                }
                _ => {}
            }
            union[sl.coord - 1].extend(sl.gens.iter().copied());
        }
    }
    for g in union.iter_mut() {
        g.sort_unstable();
        g.dedup();
    }
    let k = u.incidence();
    // free blocks: coordinate j owns k_j - 1 consecutive blocks of |G_j| bits
    let mut block_offset = vec![0usize; m];
    let mut bits = 0usize;
    for j in 0..m {
        block_offset[j] = bits;
        bits += (k[j] - 1) * union[j].len();
    }
    if bits > bit_cap {
        return Err(Error::CapExceeded {
            what: "convolution free bits",
            needed: bits,
            cap: bit_cap,
        });
    }
    struct SlotPlan {
        coord: usize,
        occurrence: usize,
        pos: Vec<usize>,
        shift: usize,
    }
    let mut seen = vec![0usize; m];
    let plans: Vec<Vec<SlotPlan>> = tables
        .iter()
        .map(|t| {
            let mut shift = 0;
            t.slots
                .iter()
                .map(|sl| {
                    let j = sl.coord - 1;
                    let plan = SlotPlan {
                        coord: j,
                        occurrence: seen[j],
                        pos: positions(&sl.gens, &union[j]),
                        shift,
                    };
                    seen[j] += 1;
                    shift += sl.gens.len();
                    plan
                })
                .collect()
        })
        .collect();

    let total = 1u64 << bits;
    let chunk = 4096u64;
    let partials: Vec<Complex64> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut last = vec![0u64; m];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                for j in 0..m {
                    let w = union[j].len();
                    let mut x = 0u64;
                    for b in 0..k[j] - 1 {
                        x ^= block(idx, block_offset[j] + b * w, w);
                    }
                    last[j] = x;
                }
                let mut term = Complex64::new(1.0, 0.0);
                for (t, plan) in tables.iter().zip(&plans) {
                    let mut ti = 0u64;
                    for p in plan {
                        let w = union[p.coord].len();
                        let mask = if p.occurrence + 1 == k[p.coord] {
                            last[p.coord]
                        } else {
                            block(idx, block_offset[p.coord] + p.occurrence * w, w)
                        };
                        ti |= project(mask, &p.pos) << p.shift;
                    }
                    term *= t.values[ti as usize];
                    if term == Complex64::new(0.0, 0.0) {
                        break;
                    }
                }
                acc += term;
            }
            acc
        })
        .collect();
    Ok(partials.into_iter().sum::<Complex64>() / total as f64)
}

fn block(idx: u64, offset: usize, width: usize) -> u64 {
    if width == 0 {
        0
    } else {
        (idx >> offset) & ((1u64 << width) - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultilinearReport {
    pub covering: String,
    pub alphabet: usize,
    pub value: Complex64,
    pub expected: Complex64,
    pub defect: f64,
    pub exact: bool,
    pub table_bits: Vec<usize>,
}

/// Builds the tables of `args` in a fresh registry, convolves them along U and
/// compares with the brute-force functional at theta = 1.
pub fn verify_multilinear(
    u: &CoveringSequence,
    args: &[CoordVector],
    alphabet: usize,
    config: &PhiConfig,
) -> Result<MultilinearReport> {
    let mut registry = SlotRegistry::new(u.m());
    let tables = build_tables(u, args, alphabet, &mut registry, config)?;
    let value = frac_convolution(u, &tables)?;
    let expected = eta_bruteforce(u, &Theta::ones(alphabet, u.m())?, args)?;
    Ok(MultilinearReport {
        covering: u.to_string(),
        alphabet,
        value,
        expected,
        defect: (value - expected).norm(),
        exact: tables.iter().all(|t| t.is_exact()),
        table_bits: tables.iter().map(|t| t.bits()).collect(),
    })
}

/// A random real argument over A^S with unit l2 norm, keyed by `tuple_key`.
pub fn random_unit_argument<R: rand::Rng>(rng: &mut R, alphabet: usize, len: usize) -> CoordVector {
    let size = alphabet.pow(len as u32);
    let v: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let x = CoordVector::from_real((0..size as u64).map(|k| (k, v[k as usize] / n)));
    debug_assert!(tuple_of_key(size as u64 - 1, alphabet, len).iter().all(|&a| a < alphabet));
    x
}
