//! Recursive maps from sequence spaces into bounded Walsh series whose spectral
//! pairings reproduce dot products.
//!
//! Every scheme follows one level rule. With input x_j living on block j-1 of the
//! session, level j contributes `phase^(j-1) * s_j * K(x_j / s_j)` where K is the
//! Q or P kernel, and the next input is `s_j * K^(w)(x_j / s_j)` for each odd
//! character w of order >= 3, placed on the fresh generator tau_j(w).
//! Pairing two such series telescopes: level j yields
//! (-1)^(j-1) (<x_j, y_j> + <x_{j+1}, y_{j+1}>), so J levels leave exactly
//! <x, y> + (-1)^(J-1) <x_{J+1}, y_{J+1}>. This holds for pruned expansions too,
//! because first-order coefficients are never pruned and the next level is built
//! from exactly the retained terms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{contraction, delta, endpoint_c, k_of_t, q_lipschitz_constant};
use crate::coords::CoordVector;
use crate::dyadic::{pairing_abs_mass, parseval_pair, series_linear, Character, GeneratorId, Session, SessionId, WalshSeries};
use crate::error::{Error, Result};
use crate::riesz::{expand, ExpansionOptions, Kernel, NORM_TOLERANCE};
use crate::sup::{sup_norm, SupBounds, SupMode, DEFAULT_BIT_CAP};

/// Relative roundoff allowance per unit of absolute pairing mass.
pub const ROUNDOFF_FACTOR: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// No order cap and no pruning; per-level support must stay within the bit cap.
    Exact,
    /// Expansions use `order_cap` and `prune_eps`.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig {
    pub levels: usize,
    pub order_cap: usize,
    pub prune_eps: f64,
    /// Normalization parameter used by `Scheme::Phi2` via `build`.
    pub t: f64,
    /// Phase denominator used by `Scheme::PhiK` via `build`.
    pub phase_k: u32,
    pub mode: Mode,
    pub bit_cap: usize,
    pub max_terms: usize,
}

impl PhiConfig {
    pub fn exact(levels: usize) -> Self {
        PhiConfig {
            levels,
            order_cap: 9,
            prune_eps: 1e-14,
            t: 1.0,
            phase_k: 2,
            mode: Mode::Exact,
            bit_cap: DEFAULT_BIT_CAP,
            max_terms: 1 << 22,
        }
    }

    pub fn truncated(levels: usize) -> Self {
        PhiConfig {
            prune_eps: 1e-10,
            mode: Mode::Truncated,
            ..Self::exact(levels)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidArgument("levels must be positive".into()));
        }
        if self.order_cap % 2 == 0 {
            return Err(Error::InvalidArgument(format!("order cap must be odd, got {}", self.order_cap)));
        }
        if !(self.prune_eps >= 0.0) {
            return Err(Error::InvalidArgument("prune_eps must be >= 0".into()));
        }
        Ok(())
    }

    fn expansion(&self) -> ExpansionOptions {
        match self.mode {
            Mode::Exact => ExpansionOptions {
                max_terms: self.max_terms,
                ..ExpansionOptions::exact()
            },
            Mode::Truncated => ExpansionOptions {
                order_cap: Some(self.order_cap),
                prune_eps: self.prune_eps,
                max_terms: self.max_terms,
            },
        }
    }
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self::exact(10)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Scheme {
    /// Geometric scaling by delta on the unit ball of l2.
    Phi,
    /// Normalized scaling t * ||x_j||, defined on all of l2.
    Phi2 { t: f64 },
    /// Normalized scaling with t = 1 and level phase e^{i pi / k}.
    PhiK { k: u32 },
    /// The l^p family, p in [1, inf] (`f64::INFINITY` for the sup norm).
    PhiP { p: f64 },
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Phi => "phi".into(),
            Scheme::Phi2 { t } => format!("phi2(t={t})"),
            Scheme::PhiK { k } => format!("phi_k(k={k})"),
            Scheme::PhiP { p } => format!("phi_p(p={p})"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    One,
    I,
    Angle(f64),
}

impl Phase {
    fn pow(self, n: usize) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ][n % 4],
            Phase::Angle(theta) => Complex64::from_polar(1.0, theta * n as f64),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Scale {
    Geometric(f64),
    Normalized(f64),
    Linear,
}

#[derive(Clone, Copy, Debug)]
struct Rule {
    kernel: Kernel,
    scale: Scale,
    phase: Phase,
    /// Per-level contraction of the scheme norm of the level inputs.
    rate: f64,
    /// The exponent of that norm.
    norm_p: f64,
}

fn rule(scheme: Scheme) -> Result<Rule> {
    let d = delta();
    Ok(match scheme {
        Scheme::Phi => Rule {
            kernel: Kernel::Q,
            scale: Scale::Geometric(d),
            phase: Phase::I,
            rate: d,
            norm_p: 2.0,
        },
        Scheme::Phi2 { t } => {
            let c = endpoint_c();
            if !(t > c) {
                return Err(Error::TBelowEndpoint { t, c });
            }
            Rule {
                kernel: Kernel::Q,
                scale: Scale::Normalized(t),
                phase: Phase::I,
                rate: contraction(t),
                norm_p: 2.0,
            }
        }
        Scheme::PhiK { k } => {
            if k < 2 {
                return Err(Error::InvalidArgument(format!("phase denominator k must be >= 2, got {k}")));
            }
            Rule {
                kernel: Kernel::Q,
                scale: Scale::Normalized(1.0),
                phase: if k == 2 { Phase::I } else { Phase::Angle(std::f64::consts::PI / f64::from(k)) },
                rate: contraction(1.0),
                norm_p: 2.0,
            }
        }
        Scheme::PhiP { p } => {
            if !(p >= 1.0) {
                return Err(Error::InvalidArgument(format!("p must lie in [1, inf], got {p}")));
            }
            if p == 1.0 {
                Rule {
                    kernel: Kernel::Q,
                    scale: Scale::Linear,
                    phase: Phase::One,
                    rate: 0.0,
                    norm_p: 1.0,
                }
            } else if p <= 2.0 {
                let r = (d * d).powf(1.0 / p);
                Rule {
                    kernel: Kernel::Q,
                    scale: Scale::Geometric(r),
                    phase: Phase::I,
                    rate: r,
                    norm_p: p,
                }
            } else if p.is_finite() {
                Rule {
                    kernel: Kernel::P,
                    scale: Scale::Geometric((d * d).powf(1.0 / p)),
                    phase: Phase::I,
                    rate: (2.0 * 0.5f64.sinh() - 1.0).powf(1.0 / p),
                    norm_p: p,
                }
            } else {
                Rule {
                    kernel: Kernel::P,
                    scale: Scale::Geometric(0.25),
                    phase: Phase::One,
                    rate: 0.25,
                    norm_p: f64::INFINITY,
                }
            }
        }
    })
}

/// One recursion level: `scale * series` is its contribution.
#[derive(Clone, Debug)]
pub struct PhiLevel {
    /// 1-based level index.
    pub level: usize,
    /// Session block holding the generators of this level.
    pub block: usize,
    pub scale: Complex64,
    /// The kernel series at the rescaled input, before multiplying by `scale`.
    pub series: WalshSeries,
    /// l2 norm of this level's input.
    pub input_norm: f64,
    /// Norm of this level's input in the scheme's own l^p.
    pub input_norm_p: f64,
    pub input_support: usize,
}

/// The levels generated from one real vector.
#[derive(Clone, Debug, Default)]
pub struct PhiPart {
    levels: Vec<PhiLevel>,
    tail: Vec<(Character, f64)>,
    prune_remainder: f64,
}

impl PhiPart {
    pub fn levels(&self) -> &[PhiLevel] {
        &self.levels
    }

    pub fn x_norms(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.input_norm).collect()
    }

    /// The input the next level would receive, indexed by the characters of the
    /// last level that it lives on.
    pub fn tail(&self) -> &[(Character, f64)] {
        &self.tail
    }

    pub fn tail_norm(&self, p: f64) -> f64 {
        CoordVector::from_real(self.tail.iter().enumerate().map(|(i, (_, v))| (i as u64, *v))).norm_lp(p)
    }

    /// Certified L2 distance from the exact series with the same number of levels.
    pub fn prune_remainder(&self) -> f64 {
        self.prune_remainder
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Per-series certificate. `telescope_remainder` bounds the scheme norm of the
/// next-level input left over after the last level; a pairing of two series is
/// off by at most the product of their telescope remainders. `prune_remainder`
/// bounds the L2 distance of the computed series from the exact one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCertificate {
    pub telescope_remainder: f64,
    pub prune_remainder: f64,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct PhiSeries {
    session: SessionId,
    scheme: Scheme,
    re: PhiPart,
    im: PhiPart,
    certificate: ErrorCertificate,
    uniform_bound: Option<f64>,
}

impl PhiSeries {
    pub fn session(&self) -> SessionId {
        self.session
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn real_part(&self) -> &PhiPart {
        &self.re
    }

    pub fn imag_part(&self) -> &PhiPart {
        &self.im
    }

    /// Levels of the real part (the whole series for real inputs).
    pub fn levels(&self) -> &[PhiLevel] {
        self.re.levels()
    }

    pub fn x_norms(&self) -> Vec<f64> {
        self.re.x_norms()
    }

    pub fn certificate(&self) -> ErrorCertificate {
        self.certificate
    }

    /// A priori sup bound of the exact series, when the scheme provides one.
    pub fn uniform_bound(&self) -> Option<f64> {
        self.uniform_bound
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty() && self.im.is_empty()
    }

    /// Sum over levels of `scale * series`, real part plus i times imaginary part.
    pub fn assembled(&self) -> WalshSeries {
        let i = Complex64::new(0.0, 1.0);
        let ops: Vec<(Complex64, &WalshSeries)> = self
            .re
            .levels
            .iter()
            .map(|l| (l.scale, &l.series))
            .chain(self.im.levels.iter().map(|l| (i * l.scale, &l.series)))
            .collect();
        if ops.is_empty() {
            return WalshSeries::new(self.session);
        }
        series_linear(&ops).expect("levels share the session")
    }
}

fn l2(entries: &[(GeneratorId, f64)]) -> f64 {
    entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
}

fn lp(entries: &[(GeneratorId, f64)], p: f64) -> f64 {
    CoordVector::from_real(entries.iter().map(|(g, v)| (u64::from(g.0), *v))).norm_lp(p)
}

fn build_part(session: &mut Session, entries: Vec<(GeneratorId, f64)>, rule: Rule, cfg: &PhiConfig) -> Result<PhiPart> {
    let opts = cfg.expansion();
    let mut part = PhiPart::default();
    let mut x = entries;
    let mut err = 0.0f64;
    for j in 1..=cfg.levels {
        if x.is_empty() {
            break;
        }
        let norm = l2(&x);
        if let Scale::Linear = rule.scale {
            let series = WalshSeries::from_terms(
                session.id(),
                x.iter().map(|(g, v)| (Character::singleton(*g), Complex64::new(*v, 0.0))),
            );
            part.levels.push(PhiLevel {
                level: 1,
                block: 0,
                scale: Complex64::new(1.0, 0.0),
                series,
                input_norm: norm,
                input_norm_p: lp(&x, rule.norm_p),
                input_support: x.len(),
            });
            break;
        }
        if cfg.mode == Mode::Exact && x.len() > cfg.bit_cap {
            return Err(Error::CapExceeded {
                what: "exact-mode level support",
                needed: x.len(),
                cap: cfg.bit_cap,
            });
        }
        let s = match rule.scale {
            Scale::Geometric(r) => r.powi(j as i32 - 1),
            Scale::Normalized(t) => t * norm,
            Scale::Linear => unreachable!(),
        };
        let scaled: Vec<(GeneratorId, f64)> = x.iter().map(|(g, v)| (*g, v / s)).collect();
        let exp = expand(&scaled, rule.kernel, opts)?;

        // Lipschitz propagation of earlier truncation plus this level's dropped mass
        let lip = match rule.scale {
            Scale::Geometric(_) => q_lipschitz_constant((norm + err) / s),
            Scale::Normalized(t) => {
                t * (1.0 / (t * t)).sinh().sqrt() + 2.0 * q_lipschitz_constant(1.0 / t)
            }
            Scale::Linear => unreachable!(),
        };
        let out_err = lip * err + s * exp.dropped_l2;
        part.prune_remainder += out_err;
        err = out_err;

        let next: Vec<(Character, f64)> = exp
            .terms
            .iter()
            .filter(|(w, _)| w.order() >= 3)
            .map(|(w, c)| (w.clone(), s * c))
            .collect();
        part.levels.push(PhiLevel {
            level: j,
            block: j - 1,
            scale: rule.phase.pow(j - 1) * s,
            series: exp.into_series(session),
            input_norm: norm,
            input_norm_p: lp(&x, rule.norm_p),
            input_support: x.len(),
        });
        if j == cfg.levels {
            part.tail = next;
        } else {
            x = next
                .into_iter()
                .map(|(w, v)| Ok((session.tau(j, &w)?, v)))
                .collect::<Result<Vec<_>>>()?;
        }
    }
    Ok(part)
}

fn coord_entries(x: &CoordVector, session: &mut Session) -> Vec<(GeneratorId, f64)> {
    x.iter()
        .filter(|(_, z)| z.re != 0.0)
        .map(|(k, z)| (session.coord(k), z.re))
        .collect()
}

/// Builds the series for `scheme` at a (possibly complex) input, splitting it
/// into real and imaginary parts within the same session.
pub fn build(x: &CoordVector, scheme: Scheme, session: &mut Session, config: &PhiConfig) -> Result<PhiSeries> {
    config.validate()?;
    let rule = rule(scheme)?;
    let mut x = x.clone();
    match scheme {
        Scheme::Phi => {
            let n = x.norm_l2();
            if n > 1.0 + NORM_TOLERANCE {
                return Err(Error::NormExceeded(n));
            }
            if n > 1.0 {
                x = x.scale_real(1.0 / n);
            }
        }
        Scheme::PhiP { p } => {
            let n = x.norm_lp(p);
            if n > 1.0 + NORM_TOLERANCE {
                return Err(Error::PNormExceeded { p, norm: n });
            }
            if n > 1.0 {
                x = x.scale_real(1.0 / n);
            }
        }
        Scheme::Phi2 { .. } | Scheme::PhiK { .. } => {}
    }
    let u = x.re();
    let v = x.im();
    let re_entries = coord_entries(&u, session);
    let im_entries = coord_entries(&v, session);
    let re = build_part(session, re_entries, rule, config)?;
    let im = build_part(session, im_entries, rule, config)?;

    let tail_bound = |part: &PhiPart, norm: f64| {
        if part.tail.is_empty() {
            0.0
        } else {
            rule.rate.powi(config.levels as i32) * norm
        }
    };
    let (tu, tv) = (tail_bound(&re, u.norm_lp(rule.norm_p)), tail_bound(&im, v.norm_lp(rule.norm_p)));
    let telescope_remainder = if rule.norm_p == 2.0 { tu.hypot(tv) } else { tu + tv };
    let prune_remainder = re.prune_remainder + im.prune_remainder;
    let exact = config.mode == Mode::Exact
        && re.levels.iter().chain(&im.levels).all(|l| l.series.is_exact());

    let d = delta();
    let part_bound = |part: &PhiPart, w: &CoordVector| -> Option<f64> {
        if part.is_empty() {
            return Some(0.0);
        }
        match scheme {
            Scheme::Phi => Some(0.5f64.exp() / (1.0 - d)),
            Scheme::Phi2 { t } => Some(k_of_t(t) * w.norm_l2()),
            Scheme::PhiK { .. } => Some(k_of_t(1.0) * w.norm_l2()),
            Scheme::PhiP { p } if p == 1.0 => Some(w.norm_l1()),
            Scheme::PhiP { p } if p <= 2.0 => Some(0.5f64.exp() / (1.0 - (d * d).powf(1.0 / p))),
            Scheme::PhiP { .. } => None,
        }
    };
    let uniform_bound = match (part_bound(&re, &u), part_bound(&im, &v)) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    Ok(PhiSeries {
        session: session.id(),
        scheme,
        re,
        im,
        certificate: ErrorCertificate {
            telescope_remainder,
            prune_remainder,
            exact,
        },
        uniform_bound,
    })
}

/// Unit-ball map with geometric scaling by delta.
pub fn build_phi(x: &CoordVector, session: &mut Session, config: &PhiConfig) -> Result<PhiSeries> {
    build(x, Scheme::Phi, session, config)
}

/// Homogeneous map on all of l2 with normalization parameter `t > c`.
pub fn build_phi2(x: &CoordVector, t: f64, session: &mut Session, config: &PhiConfig) -> Result<PhiSeries> {
    build(x, Scheme::Phi2 { t }, session, config)
}

/// Homogeneous map with level phase e^{i pi / k}; k-fold spectral products of
/// these series reproduce sum_a prod_i x_i(a).
pub fn build_phi_k(x: &CoordVector, k: u32, session: &mut Session, config: &PhiConfig) -> Result<PhiSeries> {
    build(x, Scheme::PhiK { k }, session, config)
}

/// The l^p map; pass `f64::INFINITY` for p = inf.
pub fn build_phi_p(x: &CoordVector, p: f64, session: &mut Session, config: &PhiConfig) -> Result<PhiSeries> {
    build(x, Scheme::PhiP { p }, session, config)
}

/// Exponent conjugate to p.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingReport {
    pub scheme: String,
    pub dims: usize,
    #[serde(rename = "J")]
    pub levels: usize,
    pub value: Complex64,
    pub expected: Complex64,
    pub defect: f64,
    pub budget: f64,
    /// The budget without the roundoff allowance.
    pub telescope_budget: f64,
}

impl PairingReport {
    pub fn passes(&self) -> bool {
        self.defect <= self.budget
    }
}

/// Pairs the series of x with that of conj(y) in one session and compares with
/// sum_a x(a) conj(y(a)). For `PhiP { p }`, y is mapped with the conjugate exponent;
/// `PhiK { k }` pairs only for k = 2.
pub fn pair_dot(
    x: &CoordVector,
    y: &CoordVector,
    scheme: Scheme,
    session: &mut Session,
    config: &PhiConfig,
) -> Result<PairingReport> {
    let y_scheme = match scheme {
        Scheme::PhiP { p } => Scheme::PhiP { p: conjugate_exponent(p) },
        Scheme::PhiK { k } if k != 2 => {
            return Err(Error::InvalidArgument(format!("phase e^(i pi/{k}) telescopes only in {k}-fold products")))
        }
        s => s,
    };
    let fx = build(x, scheme, session, config)?;
    let fy = build(&y.conj(), y_scheme, session, config)?;
    let (ax, ay) = (fx.assembled(), fy.assembled());
    let value = parseval_pair(&ax, &ay)?;
    let expected = x.dot(y);
    let telescope_budget = fx.certificate.telescope_remainder * fy.certificate.telescope_remainder;
    let roundoff = ROUNDOFF_FACTOR * (pairing_abs_mass(&ax, &ay) + expected.norm());
    let dims = x.iter().map(|(k, _)| k).chain(y.iter().map(|(k, _)| k)).collect::<std::collections::BTreeSet<_>>().len();
    Ok(PairingReport {
        scheme: scheme.label(),
        dims,
        levels: config.levels,
        value,
        expected,
        defect: (value - expected).norm(),
        budget: telescope_budget + roundoff,
        telescope_budget,
    })
}

/// Sup bounds of the assembled series.
pub fn sup_certificate(phi: &PhiSeries, mode: SupMode) -> Result<SupBounds> {
    sup_norm(&phi.assembled(), mode)
}

/// The exact remainder (-1)^(J-1) <x_{J+1}, y_{J+1}> of a pairing, from the tails
/// of both series (real and imaginary parts combined).
pub fn telescope_residual(fx: &PhiSeries, fy: &PhiSeries, levels: usize) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let combine = |a: &PhiPart, b: &PhiPart| -> Complex64 {
        let mut s = 0.0;
        for (w, v) in &a.tail {
            if let Some((_, u)) = b.tail.iter().find(|(w2, _)| w2 == w) {
                s += v * u;
            }
        }
        Complex64::new(s, 0.0)
    };
    let total = combine(&fx.re, &fy.re) + i * combine(&fx.im, &fy.re) + i * combine(&fx.re, &fy.im)
        - combine(&fx.im, &fy.im);
    if levels % 2 == 1 {
        total
    } else {
        -total
    }
}
