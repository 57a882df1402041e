//! Numerical constants of the Grothendieck-type constructions.

use serde::Serialize;

/// sinh(u) - u without cancellation for small u.
pub fn sinh_minus_identity(u: f64) -> f64 {
    if u.abs() >= 0.5 {
        return u.sinh() - u;
    }
    // u^3/3! + u^5/5! + ...
    let u2 = u * u;
    let mut term = u * u2 / 6.0;
    let mut sum = 0.0f64;
    let mut n = 3.0;
    loop {
        sum += term;
        term *= u2 / ((n + 1.0) * (n + 2.0));
        n += 2.0;
        if term.abs() <= 0.25 * f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

/// Spectral tail constant for unit vectors: sqrt(sinh 1 - 1).
pub fn delta() -> f64 {
    sinh_minus_identity(1.0).sqrt()
}

/// Tail constant at normalization t: sqrt(sinh(1/t^2) - 1/t^2).
pub fn delta_t(t: f64) -> f64 {
    sinh_minus_identity(1.0 / (t * t)).sqrt()
}

/// Per-level contraction factor t * delta_t of the normalized recursion.
pub fn contraction(t: f64) -> f64 {
    t * delta_t(t)
}

fn endpoint_residual(c: f64) -> f64 {
    2.0 - c * c * (1.0 / (c * c)).sinh()
}

/// Positive root of 2 - c^2 sinh(1/c^2), by bisection.
pub fn endpoint_c() -> f64 {
    let (mut lo, mut hi) = (0.5, 1.0);
    debug_assert!(endpoint_residual(lo) < 0.0 && endpoint_residual(hi) > 0.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if endpoint_residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Uniform-norm constant of the normalized map: t e^{1/(2t^2)} / (1 - t delta_t).
/// Infinite at or below the endpoint.
pub fn k_of_t(t: f64) -> f64 {
    let denom = 1.0 - contraction(t);
    if !(denom > 0.0) {
        return f64::INFINITY;
    }
    t * (0.5 / (t * t)).exp() / denom
}

/// t^2 e^{1/t^2} / (2 - t^2 sinh(1/t^2)).
pub fn l_of_t(t: f64) -> f64 {
    let u = 1.0 / (t * t);
    let denom = 2.0 - u.sinh() / u;
    if !(denom > 0.0) {
        return f64::INFINITY;
    }
    u.exp() / u / denom
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// (t_min, K(t_min)) over (c, 10).
pub fn minimize_k() -> (f64, f64) {
    golden_section(k_of_t, endpoint_c() + 1e-6, 10.0, 1e-9)
}

/// (t_min, L(t_min)) over (c, 10).
pub fn minimize_l() -> (f64, f64) {
    golden_section(l_of_t, endpoint_c() + 1e-6, 10.0, 1e-9)
}

/// L2-Lipschitz constant of x -> Q(x) on the ball of radius rho: sqrt(2 cosh(2 rho^2)).
pub fn q_lipschitz_constant(rho: f64) -> f64 {
    (2.0 * (2.0 * rho * rho).cosh()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub delta: f64,
    pub c: f64,
    pub k1: f64,
    pub k_complex: f64,
}

pub fn constants() -> Constants {
    let d = delta();
    let k1 = 0.5f64.exp() / (1.0 - d);
    Constants {
        delta: d,
        c: endpoint_c(),
        k1,
        k_complex: 2.0 * k1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinh_series_matches_direct() {
        for &u in &[1e-8f64, 1e-3, 0.1, 0.49, 0.5, 0.7, 2.0] {
            let direct = u.sinh() - u;
            let rel = (sinh_minus_identity(u) - direct).abs() / direct;
            assert!(u < 0.01 || rel < 1e-12, "u={u} rel={rel}");
        }
        let u: f64 = 1e-4;
        let series = u.powi(3) / 6.0 + u.powi(5) / 120.0;
        assert!((sinh_minus_identity(u) - series).abs() < 1e-15 * series);
    }

    #[test]
    fn frozen_values() {
        let k = constants();
        assert!((k.delta - 0.41857041658937316).abs() < 1e-15);
        assert!((k.c - 0.6777023167699749).abs() < 1e-12);
        assert!((k.k1 - 2.8356336136679525).abs() < 1e-12);
        assert!((k_of_t(1.0) - k.k1).abs() < 1e-12);
        let (tk, kmin) = minimize_k();
        assert!((tk - 1.4285369831957129).abs() < 1e-6);
        assert!((kmin - 2.2850246303831105).abs() < 1e-12);
        let (tl, lmin) = minimize_l();
        assert!((tl - 1.1410596560046562).abs() < 1e-6);
        assert!((lmin - 3.1227355822006424).abs() < 1e-12);
    }

    #[test]
    fn minimizers_beat_a_grid() {
        let c = endpoint_c();
        let (_, kmin) = minimize_k();
        let (_, lmin) = minimize_l();
        for i in 1..4000 {
            let t = c + (10.0 - c) * i as f64 / 4000.0;
            assert!(k_of_t(t) >= kmin - 1e-12);
            assert!(l_of_t(t) >= lmin - 1e-12);
        }
    }

    #[test]
    fn endpoint_is_where_contraction_hits_one() {
        let c = endpoint_c();
        assert!(endpoint_residual(c).abs() < 1e-10);
        assert!((contraction(c) - 1.0).abs() < 1e-6);
        assert!(contraction(c + 0.01) < 1.0);
        assert!(k_of_t(c - 0.01).is_infinite());
    }
}
