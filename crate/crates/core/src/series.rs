//! Tail sums over lattice zero streams via Hurwitz zeta values.
//!
//! Everything here evaluates
//! `sum_{k >= k0} P(k) * (x + (k + c)^e)^(-sigma)` for a polynomial `P`
//! with float coefficients and `e` in {1, 2}.

use crate::error::{Error, Result};
use crate::special::hurwitz_zeta;

/// Coefficients of `p(t + c)` for ascending float coefficients `p`.
pub fn shift_coeffs(p: &[f64], c: f64) -> Vec<f64> {
    let mut a = p.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            a[j] += c * a[j + 1];
        }
    }
    a
}

fn degree(p: &[f64]) -> usize {
    p.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

/// `sum_{k >= k0} P(k) (x + k + c)^(-sigma)`; needs `k0 + c + x > 0` and
/// `sigma > deg P + 1`.
pub fn linear_tail(p: &[f64], c: f64, k0: i64, x: f64, sigma: f64) -> Result<f64> {
    let q0 = k0 as f64 + c + x;
    if q0 <= 0.0 {
        return Err(Error::InvalidInput(format!("tail start {q0} must be positive")));
    }
    if p.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let d = degree(p);
    if sigma <= d as f64 + 1.0 {
        return Err(Error::Divergent(format!("sum of degree-{d} weights against power {sigma}")));
    }
    // P(k) = Q(k + c + x)
    let q = shift_coeffs(p, -(c + x));
    Ok(q.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(r, &v)| v * hurwitz_zeta(sigma - r as f64, q0))
        .sum())
}

/// `sum_{k >= k0} P(k) (x + (k + c)^2)^(-sigma)`; needs
/// `(k0 + c)^2 >= 4 x`, `k0 + c > 0` and `2 sigma > deg P + 1`.
pub fn quadratic_tail(p: &[f64], c: f64, k0: i64, x: f64, sigma: f64) -> Result<f64> {
    let u0 = k0 as f64 + c;
    if u0 <= 0.0 || u0 * u0 < 4.0 * x.abs() {
        return Err(Error::InvalidInput(format!("quadratic tail start {u0} too small for x = {x}")));
    }
    if p.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let d = degree(p);
    if 2.0 * sigma <= d as f64 + 1.0 {
        return Err(Error::Divergent(format!("sum of degree-{d} weights against power {}", 2.0 * sigma)));
    }
    let q = shift_coeffs(p, -c);
    let inner = |i: usize| -> f64 {
        q.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(r, &v)| v * hurwitz_zeta(2.0 * sigma + 2.0 * i as f64 - r as f64, u0))
            .sum()
    };
    // (1 + x/u^2)^(-sigma) = sum_i binom(-sigma, i) (x/u^2)^i
    let mut total = 0.0;
    let mut coef = 1.0;
    let mut xi = 1.0;
    for i in 0..400 {
        let term = coef * xi * inner(i);
        total += term;
        if term.abs() <= 1e-18 * total.abs() || term == 0.0 {
            return Ok(total);
        }
        coef *= -(sigma + i as f64) / (i as f64 + 1.0);
        xi *= x;
    }
    Ok(total)
}

/// Dispatch on the lattice exponent.
pub fn lattice_tail(p: &[f64], c: f64, exponent: u32, k0: i64, x: f64, sigma: f64) -> Result<f64> {
    match exponent {
        1 => linear_tail(p, c, k0, x, sigma),
        2 => quadratic_tail(p, c, k0, x, sigma),
        e => Err(Error::InvalidInput(format!("lattice exponent {e} unsupported"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Partial sum of `n` terms plus an Euler–Maclaurin remainder
    /// (integral by Simpson's rule on a geometric grid, plus half the
    /// boundary term).
    fn brute(p: &[f64], c: f64, e: i32, k0: i64, x: f64, sigma: f64, n: i64) -> f64 {
        let f = |k: f64| p.iter().rev().fold(0.0, |a, v| a * k + v) * (x + (k + c).powi(e)).powf(-sigma);
        let mut s = 0.0;
        for k in (k0..k0 + n).rev() {
            s += f(k as f64);
        }
        let kn = (k0 + n) as f64;
        let mut integral = 0.0;
        let mut lo = kn;
        while lo < kn * 1e8 {
            let hi = lo * 1.01;
            integral += (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi)) * (hi - lo) / 6.0;
            lo = hi;
        }
        s + integral + 0.5 * f(kn)
    }

    #[test]
    fn shift_coeffs_matches_expansion() {
        // (t + 2)^2 = t^2 + 4t + 4
        assert_eq!(shift_coeffs(&[0.0, 0.0, 1.0], 2.0), vec![4.0, 4.0, 1.0]);
    }

    #[test]
    fn linear_tail_against_partial_sums() {
        let cases: &[(&[f64], f64, i64, f64, f64)] = &[
            (&[1.0], 0.0, 0, 1.0, 2.0),
            (&[1.0, 1.0], 0.5, 3, 2.0, 4.0),
            (&[1.0, 1.5, 0.5], 0.0, 10, 12.0, 5.0),
        ];
        for &(p, c, k0, x, sigma) in cases {
            let got = linear_tail(p, c, k0, x, sigma).unwrap();
            let want = brute(p, c, 1, k0, x, sigma, 20_000);
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
        // sum_{k>=0} 1/(1+k)^2 = pi^2/6
        assert_relative_eq!(linear_tail(&[1.0], 0.0, 0, 1.0, 2.0).unwrap(), std::f64::consts::PI.powi(2) / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn quadratic_tail_against_partial_sums() {
        let cases: &[(&[f64], f64, i64, f64, f64)] = &[
            (&[1.0], 0.0, 2, 1.0, 1.0),
            (&[1.0, 1.0], 1.0, 4, 4.0, 1.5),
            (&[0.0, 0.0, 1.0], 0.5, 6, 9.0, 2.0),
        ];
        for &(p, c, k0, x, sigma) in cases {
            let got = quadratic_tail(p, c, k0, x, sigma).unwrap();
            let want = brute(p, c, 2, k0, x, sigma, 20_000);
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn rejects_divergent_and_bad_starts() {
        assert!(matches!(linear_tail(&[0.0, 1.0], 0.0, 1, 1.0, 2.0), Err(Error::Divergent(_))));
        assert!(linear_tail(&[1.0], 0.0, -3, 1.0, 3.0).is_err());
        assert!(quadratic_tail(&[1.0], 0.0, 1, 10.0, 1.0).is_err());
        assert_eq!(linear_tail(&[0.0], 0.0, 1, 1.0, 0.5).unwrap(), 0.0);
    }
}
