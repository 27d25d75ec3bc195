//! Adaptive Gauss–Legendre quadrature on finite intervals and on `(0, inf)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rules {
    coarse: (Vec<f64>, Vec<f64>),
    fine: (Vec<f64>, Vec<f64>),
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules { coarse: gauss_legendre(15), fine: gauss_legendre(31) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-panel |G31 - G15| estimates.
    pub error: f64,
    pub evaluations: usize,
}

fn apply<F: FnMut(f64) -> Result<f64>>(rule: &(Vec<f64>, Vec<f64>), f: &mut F, a: f64, b: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        let v = f(mid + half * x)?;
        if !v.is_finite() {
            return Err(Error::Divergent(format!("integrand is not finite at {}", mid + half * x)));
        }
        s += w * v;
    }
    Ok(s * half)
}

const MAX_DEPTH: u32 = 40;

/// Adaptive bisection with a G15/G31 error estimate; a panel is accepted
/// when its estimate is below `max(abs_tol, rel_tol * |panel|)`, with the
/// absolute share halved at each level.
/// Returns the accumulated G31 value and the sum of panel estimates.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    let r = rules();
    let mut out = QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    let mut stack = vec![(a, b, abs_tol, 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let fine = apply(&r.fine, &mut f, lo, hi)?;
        let coarse = apply(&r.coarse, &mut f, lo, hi)?;
        out.evaluations += 46;
        let err = (fine - coarse).abs();
        // Panels at the depth limit are accepted; their estimate still goes
        // into the reported error.
        if err <= tol.max(rel_tol * fine.abs()) || depth >= MAX_DEPTH {
            out.value += fine;
            out.error += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * tol, depth + 1));
            stack.push((lo, mid, 0.5 * tol, depth + 1));
        }
    }
    Ok(out)
}

const MAX_PANELS: i32 = 160;

/// `int_0^inf f(s) ds` over dyadic panels `[2^-j-1, 2^-j]` toward 0 and
/// `[2^j, 2^j+1]` toward infinity. A direction stops once three consecutive
/// panels contribute less than `rel_tol` of the running total; if it never
/// does the integrand is reported as divergent.
pub fn integrate_half_line<F: FnMut(f64) -> Result<f64>>(mut f: F, rel_tol: f64) -> Result<QuadResult> {
    let panel_tol = rel_tol * 1e-2;
    let first = integrate(&mut f, 0.5, 1.0, 0.0, panel_tol)?;
    let second = integrate(&mut f, 1.0, 2.0, 0.0, panel_tol)?;
    let mut out = QuadResult {
        value: first.value + second.value,
        error: first.error + second.error,
        evaluations: first.evaluations + second.evaluations,
    };
    for dir in [-1i32, 1] {
        let mut small = 0;
        let mut j = 1;
        loop {
            let (lo, hi) = if dir < 0 { (0.5f64.powi(j + 1), 0.5f64.powi(j)) } else { (2f64.powi(j), 2f64.powi(j + 1)) };
            let scale = out.value.abs().max(f64::MIN_POSITIVE);
            let p = integrate(&mut f, lo, hi, rel_tol * 1e-3 * scale, panel_tol)?;
            out.value += p.value;
            out.error += p.error;
            out.evaluations += p.evaluations;
            if p.value.abs() <= rel_tol * 1e-2 * out.value.abs() || (p.value == 0.0 && out.value == 0.0) {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            j += 1;
            if j > MAX_PANELS {
                let end = if dir < 0 { "0" } else { "infinity" };
                return Err(Error::Divergent(format!("integral does not settle toward {end}")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_and_weights() {
        for n in [1, 2, 5, 15, 31] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            // exact for degree 2n-1
            let deg = 2 * n - 2;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(got, 2.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
        let (x, _) = gauss_legendre(2);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn finite_intervals() {
        let r = integrate(|x| Ok(x.sin()), 0.0, std::f64::consts::PI, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-14);
        let r = integrate(|x| Ok(x.sqrt()), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(r.value, 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn half_line() {
        let r = integrate_half_line(|s| Ok((-s).exp()), 1e-13).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-13);
        // int s^-1/2 e^-s = sqrt(pi)
        let r = integrate_half_line(|s| Ok(s.powf(-0.5) * (-s).exp()), 1e-12).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), max_relative = 1e-11);
        // int 1/(1+s)^2 = 1
        let r = integrate_half_line(|s| Ok((1.0 + s).powi(-2)), 1e-12).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-11);
    }

    #[test]
    fn divergence_is_detected() {
        assert!(matches!(integrate_half_line(|s| Ok((-s).exp() / s), 1e-10), Err(Error::Divergent(_))));
        assert!(matches!(integrate_half_line(|s| Ok(1.0 / (1.0 + s)), 1e-10), Err(Error::Divergent(_))));
    }
}
