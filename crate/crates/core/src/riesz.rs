//! Riesz products and their odd parts as sparse Walsh series.
//!
//! With R(x) = prod_a (1 + x(a) r_a):
//! - `Kernel::Full` is R(x) itself (all orders, weight 1);
//! - `Kernel::Q` is Im R(ix): weight (-1)^k on each subset of odd order 2k+1;
//! - `Kernel::P` is R(x/2) - R(-x/2): weight 4^-k on each subset of order 2k+1.

use num_complex::Complex64;

use crate::constants::{q_lipschitz_constant, sinh_minus_identity};
use crate::coords::CoordVector;
use crate::dyadic::{Character, GeneratorId, Session, WalshSeries};
use crate::error::{Error, Result};

/// Total variation of P(x) as a measure when ||x||_inf <= 1.
pub const P_TOTAL_VARIATION_BOUND: f64 = 2.0;

/// Bound on the coefficients of P(x) of order >= 3 when ||x||_inf <= 1.
pub const P_HIGH_ORDER_COEFF_BOUND: f64 = 0.25;

/// Slack allowed on unit-ball preconditions.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Q,
    P,
    Full,
}

impl Kernel {
    pub fn includes(self, order: usize) -> bool {
        match self {
            Kernel::Q | Kernel::P => order % 2 == 1,
            Kernel::Full => true,
        }
    }

    pub fn weight(self, order: usize) -> f64 {
        let k = order / 2;
        match self {
            Kernel::Q => {
                if k % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kernel::P => 0.25f64.powi(k as i32),
            Kernel::Full => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionOptions {
    /// Highest order kept; `None` keeps every order.
    pub order_cap: Option<usize>,
    /// Coefficients of order >= 2 below this modulus are dropped into the ledgers.
    pub prune_eps: f64,
    /// Abort with `WorkCap` after visiting this many subsets.
    pub max_terms: usize,
}

impl ExpansionOptions {
    pub fn exact() -> Self {
        ExpansionOptions {
            order_cap: None,
            prune_eps: 0.0,
            max_terms: 1 << 22,
        }
    }

    pub fn truncated(order_cap: usize, prune_eps: f64) -> Self {
        ExpansionOptions {
            order_cap: Some(order_cap),
            prune_eps,
            max_terms: 1 << 22,
        }
    }
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self::truncated(9, 0.0)
    }
}

/// Real-coefficient expansion over generator ids.
#[derive(Clone, Debug)]
pub(crate) struct Expansion {
    pub terms: Vec<(Character, f64)>,
    pub dropped_l2: f64,
    pub dropped_l1: f64,
}

impl Expansion {
    pub fn into_series(self, session: &Session) -> WalshSeries {
        WalshSeries::from_terms(
            session.id(),
            self.terms.into_iter().map(|(w, c)| (w, Complex64::new(c, 0.0))),
        )
        .with_ledger(self.dropped_l2, self.dropped_l1)
    }
}

/// sum_{r=lo}^{hi} s^r / r!
fn exp_partial(s: f64, lo: usize, hi: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for r in 0..=hi {
        if r > 0 {
            term *= s / r as f64;
        }
        if r >= lo {
            sum += term;
        }
    }
    sum
}

struct Expander<'a> {
    x: Vec<f64>,
    gens: Vec<GeneratorId>,
    kernel: Kernel,
    cap: usize,
    eps: f64,
    max_terms: usize,
    suffix_sq: Vec<f64>,
    suffix_abs: Vec<f64>,
    suffix_growth: Vec<f64>,
    subset: Vec<usize>,
    visited: usize,
    out: &'a mut Vec<(Character, f64)>,
    pruned_sq: f64,
    pruned_l1: f64,
}

impl Expander<'_> {
    fn visit(&mut self, start: usize, p: f64) -> Result<()> {
        let n = self.x.len();
        for i in start..n {
            let q = p * self.x[i];
            self.subset.push(i);
            self.visited += 1;
            if self.visited > self.max_terms {
                return Err(Error::WorkCap {
                    what: "riesz expansion",
                    needed: self.visited as u128,
                    cap: self.max_terms as u128,
                });
            }
            let ord = self.subset.len();
            if self.kernel.includes(ord) {
                let c = self.kernel.weight(ord) * q;
                if ord == 1 || c.abs() >= self.eps {
                    let mut gens: Vec<GeneratorId> = self.subset.iter().map(|&k| self.gens[k]).collect();
                    gens.sort_unstable();
                    self.out.push((Character::from_sorted(gens), c));
                } else {
                    self.pruned_sq += c * c;
                    self.pruned_l1 += c.abs();
                }
            }
            if ord < self.cap && i + 1 < n {
                if self.eps > 0.0 && q.abs() * self.suffix_growth[i + 1] < self.eps {
                    // every extension has modulus below eps: bound the whole subtree
                    // via e_r(y) <= (sum y)^r / r!
                    let room = self.cap - ord;
                    self.pruned_sq += q * q * exp_partial(self.suffix_sq[i + 1], 1, room);
                    self.pruned_l1 += q.abs() * exp_partial(self.suffix_abs[i + 1], 1, room);
                } else {
                    self.visit(i + 1, q)?;
                }
            }
            self.subset.pop();
        }
        Ok(())
    }
}

/// Elementary symmetric polynomials e_0..e_n of `ys`.
fn elementary_symmetric(ys: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; ys.len() + 1];
    e[0] = 1.0;
    for (k, &y) in ys.iter().enumerate() {
        for r in (1..=k + 1).rev() {
            e[r] += e[r - 1] * y;
        }
    }
    e
}

/// Expands the kernel at a real vector given as (generator, value) pairs with
/// distinct generators.
pub(crate) fn expand(entries: &[(GeneratorId, f64)], kernel: Kernel, opts: ExpansionOptions) -> Result<Expansion> {
    if let Some(cap) = opts.order_cap {
        if kernel != Kernel::Full && cap % 2 == 0 {
            return Err(Error::InvalidArgument(format!("order cap must be odd, got {cap}")));
        }
    }
    if !(opts.prune_eps >= 0.0) {
        return Err(Error::InvalidArgument("prune_eps must be >= 0".into()));
    }
    let mut sorted: Vec<(GeneratorId, f64)> = entries.iter().copied().filter(|(_, v)| *v != 0.0).collect();
    sorted.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap().then(a.0.cmp(&b.0)));
    let n = sorted.len();
    let cap = opts.order_cap.unwrap_or(n).min(n);

    let mut suffix_sq = vec![0.0; n + 1];
    let mut suffix_abs = vec![0.0; n + 1];
    let mut suffix_growth = vec![1.0; n + 1];
    for i in (0..n).rev() {
        let v = sorted[i].1;
        suffix_sq[i] = suffix_sq[i + 1] + v * v;
        suffix_abs[i] = suffix_abs[i + 1] + v.abs();
        suffix_growth[i] = suffix_growth[i + 1] * v.abs().max(1.0);
    }

    let mut terms = Vec::new();
    if kernel == Kernel::Full {
        terms.push((Character::identity(), 1.0));
    }
    let mut ex = Expander {
        x: sorted.iter().map(|e| e.1).collect(),
        gens: sorted.iter().map(|e| e.0).collect(),
        kernel,
        cap,
        eps: opts.prune_eps,
        max_terms: opts.max_terms,
        suffix_sq,
        suffix_abs,
        suffix_growth,
        subset: Vec::new(),
        visited: 0,
        out: &mut terms,
        pruned_sq: 0.0,
        pruned_l1: 0.0,
    };
    if cap > 0 {
        ex.visit(0, 1.0)?;
    }
    let (mut l2_sq, mut l1) = (ex.pruned_sq, ex.pruned_l1);

    if cap < n {
        // mass of the orders above the cap, from e_r(x^2) exactly and e_r(|x|) <= |x|_1^r / r!
        let squares: Vec<f64> = sorted.iter().map(|e| e.1 * e.1).collect();
        let e_sq = elementary_symmetric(&squares);
        let s1: f64 = sorted.iter().map(|e| e.1.abs()).sum();
        let mut term = 1.0;
        for r in 1..=n {
            term *= s1 / r as f64;
            if r > cap && kernel.includes(r) {
                let w = kernel.weight(r).abs();
                l2_sq += w * w * e_sq[r];
                l1 += w * term;
            }
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Expansion {
        terms,
        dropped_l2: l2_sq.sqrt(),
        dropped_l1: l1,
    })
}

fn real_entries(x: &CoordVector, session: &mut Session) -> Result<Vec<(GeneratorId, f64)>> {
    if !x.is_real() {
        return Err(Error::NotReal);
    }
    Ok(x.iter().map(|(k, z)| (session.coord(k), z.re)).collect())
}

/// Q(x) = Im R(ix) with coordinates mapped through the session's coordinate generators.
pub fn q_series(x: &CoordVector, session: &mut Session, opts: ExpansionOptions) -> Result<WalshSeries> {
    let entries = real_entries(x, session)?;
    Ok(expand(&entries, Kernel::Q, opts)?.into_series(session))
}

/// P(x) = R(x/2) - R(-x/2); requires ||x||_inf <= 1.
pub fn p_series(x: &CoordVector, session: &mut Session, opts: ExpansionOptions) -> Result<WalshSeries> {
    if !x.is_real() {
        return Err(Error::NotReal);
    }
    let m = x.norm_linf();
    if m > 1.0 + NORM_TOLERANCE {
        return Err(Error::SupNormExceeded(m));
    }
    let entries = real_entries(x, session)?;
    Ok(expand(&entries, Kernel::P, opts)?.into_series(session))
}

/// The Riesz product R(x) = prod (1 + x(a) r_a) itself.
pub fn riesz_product(x: &CoordVector, session: &mut Session, opts: ExpansionOptions) -> Result<WalshSeries> {
    let entries = real_entries(x, session)?;
    Ok(expand(&entries, Kernel::Full, opts)?.into_series(session))
}

/// sqrt(sinh ||x||^2 - ||x||^2): bound on the l2 mass of Q(x) above order 1.
pub fn q_tail_l2(x: &CoordVector) -> f64 {
    let n2 = x.norm_l2().powi(2);
    sinh_minus_identity(n2).sqrt()
}

/// e^{||x||^2 / 2}: bound on sup |Q(x)|.
pub fn q_sup_bound(x: &CoordVector) -> f64 {
    (0.5 * x.norm_l2().powi(2)).exp()
}

/// sinh ||x||_1: bound on the l1 norm of the coefficients of Q(x).
pub fn q_l1_spectral_bound(x: &CoordVector) -> f64 {
    x.norm_l1().sinh()
}

/// sqrt(2 cosh(2 rho^2)) ||x - y||, rho = max(||x||, ||y||): bound on ||Q(x) - Q(y)||_L2.
pub fn lipschitz_bound(x: &CoordVector, y: &CoordVector) -> f64 {
    let rho = x.norm_l2().max(y.norm_l2());
    q_lipschitz_constant(rho) * x.sub(y).norm_l2()
}
