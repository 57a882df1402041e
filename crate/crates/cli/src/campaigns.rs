use dyadic_grothendieck::multilinear::{
    ksz_demo, psi_gauge, psi_witness, random_unit_argument, three_halves_product, three_halves_witness,
    verify_multilinear, CoveringSequence, KszSigns,
};
use dyadic_grothendieck::phi::{conjugate_exponent, pair_dot, PairingReport, PhiConfig, Scheme};
use dyadic_grothendieck::rng::case_rng;
use dyadic_grothendieck::{CoordVector, Result, Session};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::report::{digest, Num, Row};

/// Absolute tolerance for multilinear agreement; arguments have unit l2 norm.
pub const MULTILINEAR_TOL: f64 = 1e-9;

fn vector_bytes(x: &CoordVector) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, z) in x.iter() {
        out.extend(k.to_le_bytes());
        out.extend(z.re.to_bits().to_le_bytes());
        out.extend(z.im.to_bits().to_le_bytes());
    }
    out
}

fn vectors_digest(label: &str, xs: &[&CoordVector]) -> String {
    let bytes: Vec<Vec<u8>> = xs.iter().map(|x| vector_bytes(x)).collect();
    let mut fields: Vec<&[u8]> = vec![label.as_bytes()];
    fields.extend(bytes.iter().map(|b| b.as_slice()));
    digest(&fields)
}

/// Random vector on keys 0..dim with l^p norm `radius`, complex when `complex`.
fn scaled_vector<R: Rng>(rng: &mut R, dim: usize, p: f64, radius: f64, complex: bool) -> CoordVector {
    let x = if complex {
        let v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        CoordVector::from_dense_complex(&v)
    } else {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        CoordVector::from_dense(&v)
    };
    let n = x.norm_lp(p);
    if n == 0.0 {
        x
    } else {
        x.scale_real(radius / n)
    }
}

/// A point of the closed unit ball of l^p, real or complex at random.
fn ball_vector<R: Rng>(rng: &mut R, dim: usize, p: f64) -> CoordVector {
    let r = rng.gen_range(0.05..=1.0);
    let complex = rng.gen::<bool>();
    scaled_vector(rng, dim, p, r, complex)
}

fn pairing_row(case: u64, x: &CoordVector, y: &CoordVector, r: &PairingReport) -> Row {
    Row {
        case_id: case,
        inputs_digest: vectors_digest(&r.scheme, &[x, y]),
        value: r.value.into(),
        expected: r.expected.into(),
        defect: r.defect,
        budget: r.budget,
        pass: r.passes(),
    }
}

fn run_cases<F>(trials: u64, f: F) -> Result<Vec<Row>>
where
    F: Fn(u64) -> Result<Row> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

pub fn verify_parseval(scheme: Scheme, dim: usize, trials: u64, seed: u64, cfg: &PhiConfig) -> Result<Vec<Row>> {
    run_cases(trials, |case| {
        let mut rng = case_rng(seed, case);
        let (x, y) = match scheme {
            Scheme::Phi2 { .. } | Scheme::PhiK { .. } => {
                let (rx, ry) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
                (scaled_vector(&mut rng, dim, 2.0, rx, true), scaled_vector(&mut rng, dim, 2.0, ry, true))
            }
            _ => (ball_vector(&mut rng, dim, 2.0), ball_vector(&mut rng, dim, 2.0)),
        };
        let r = pair_dot(&x, &y, scheme, &mut Session::new(), cfg)?;
        Ok(pairing_row(case, &x, &y, &r))
    })
}

pub fn verify_lp_pairing(
    p: f64,
    dim: usize,
    partner_dim: usize,
    trials: u64,
    seed: u64,
    cfg: &PhiConfig,
) -> Result<Vec<Row>> {
    let q = conjugate_exponent(p);
    run_cases(trials, |case| {
        let mut rng = case_rng(seed, case);
        let x = ball_vector(&mut rng, dim, p);
        let y = ball_vector(&mut rng, partner_dim, q);
        let r = pair_dot(&x, &y, Scheme::PhiP { p }, &mut Session::new(), cfg)?;
        Ok(pairing_row(case, &x, &y, &r))
    })
}

pub fn verify_multilinear_cases(
    u: &CoveringSequence,
    alphabet: usize,
    trials: u64,
    seed: u64,
    cfg: &PhiConfig,
) -> Result<Vec<Row>> {
    let label = format!("{u}|{alphabet}");
    run_cases(trials, |case| {
        let mut rng = case_rng(seed, case);
        let args: Vec<CoordVector> =
            u.sets().iter().map(|s| random_unit_argument(&mut rng, alphabet, s.len())).collect();
        let r = verify_multilinear(u, &args, alphabet, cfg)?;
        Ok(Row {
            case_id: case,
            inputs_digest: vectors_digest(&label, &args.iter().collect::<Vec<_>>()),
            value: r.value.into(),
            expected: r.expected.into(),
            defect: r.defect,
            budget: MULTILINEAR_TOL,
            pass: r.defect <= MULTILINEAR_TOL,
        })
    })
}

/// Psi(s) of the 3/2-product over an alphabet of size k against the B^2 witness
/// with |B| = floor(sqrt(s)).
pub fn psi_cases(k: u64, sizes: &[usize]) -> Result<Vec<Row>> {
    let f = three_halves_product(k);
    sizes
        .iter()
        .map(|&s| {
            let b = ((s as f64).sqrt().floor() as u64).min(k);
            let witness = psi_witness(&f, &three_halves_witness(k, b))?;
            let value = psi_gauge(&f, s)?;
            Ok(Row {
                case_id: s as u64,
                inputs_digest: digest(&[b"three-halves", &k.to_le_bytes(), &(s as u64).to_le_bytes()]),
                value: Num::Count(value as u64),
                expected: Num::Count(witness as u64),
                defect: witness.saturating_sub(value) as f64,
                budget: 0.0,
                pass: value >= witness,
            })
        })
        .collect()
}

/// One row per N: the lower bound on the projective norm against the previous N's
/// value; a row passes when the sequence has not decreased.
pub fn ksz_cases(ns: &[usize], trials: usize, samples: usize, seed: u64, signs: KszSigns) -> Result<Vec<Row>> {
    let records = ns
        .par_iter()
        .map(|&n| ksz_demo(n, trials, samples, seed, signs))
        .collect::<Result<Vec<_>>>()?;
    let mut prev = 0.0f64;
    Ok(records
        .iter()
        .map(|r| {
            let row = Row {
                case_id: r.n as u64,
                inputs_digest: digest(&[
                    format!("{signs:?}").as_bytes(),
                    &(r.n as u64).to_le_bytes(),
                    &(trials as u64).to_le_bytes(),
                    &(samples as u64).to_le_bytes(),
                    &seed.to_le_bytes(),
                ]),
                value: Num::Real(r.vnorm_lower),
                expected: Num::Real(prev),
                defect: (prev - r.vnorm_lower).max(0.0),
                budget: 0.0,
                pass: r.vnorm_lower >= prev,
            };
            prev = r.vnorm_lower;
            row
        })
        .collect())
}
