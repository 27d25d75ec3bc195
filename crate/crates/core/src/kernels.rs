//! Laplace-side kernels: `g_ell`, the zero kernels `h` and `xi`, and the
//! Laplace identity tying `g_ell` to `rho_ell`.

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::catalog::{EntireModel, ZeroStream};
use crate::error::{Error, Result};
use crate::piecewise::build_rho;
use crate::rational::{self, Rational};
use crate::sequences::{power_sum_delta, pte_degree, SequencePair};
use crate::series::shift_coeffs;
use crate::special::{bernoulli, factorial, gamma_upper};

/// Evaluator for
/// `g_ell(s) = (sum e^{-s a_k} - sum e^{-s b_k}) / s^(1+ell)`.
///
/// Below `s * max(a, b) < 1` the Taylor form
/// `sum_m (-1)^m Delta_m s^(m-ell-1) / m!` is used, with `Delta_m` exact.
#[derive(Debug, Clone)]
pub struct GKernel {
    ell: u32,
    a: Vec<f64>,
    b: Vec<f64>,
    c_max: f64,
    /// `(-1)^m Delta_m / m!` for `m = 0..TAYLOR_TERMS`.
    taylor: Vec<f64>,
    pte: Option<u32>,
    identical: bool,
}

const TAYLOR_TERMS: u32 = 60;

impl GKernel {
    pub fn new(pair: &SequencePair, ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidInput("g_ell needs ell >= 1".into()));
        }
        let taylor = (0..TAYLOR_TERMS)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * rational::to_f64(&power_sum_delta(pair, m)) / factorial(m)
            })
            .collect();
        Ok(GKernel {
            ell,
            a: pair.a_f64(),
            b: pair.b_f64(),
            c_max: rational::to_f64(&pair.max_entry()),
            taylor,
            pte: pte_degree(pair).finite(),
            identical: pair.is_identical(),
        })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!("g_ell needs s >= 0, got {s}")));
        }
        if self.identical {
            return Ok(0.0);
        }
        let ell = self.ell as i32;
        if s == 0.0 {
            return match self.pte {
                Some(d) if d < self.ell => Err(Error::Divergent(format!(
                    "g_{} has no finite limit at s = 0 (power sums agree only to degree {d})",
                    self.ell
                ))),
                _ => Ok(self.taylor[self.ell as usize + 1]),
            };
        }
        if s * self.c_max < 1.0 {
            let mut sum = 0.0;
            // ascending powers s^(m - ell - 1); |Delta_m| <= n c^m bounds the rest
            let n = self.a.len() as f64;
            let mut pw = s.powi(-ell - 1);
            let mut bound = n * pw;
            for (m, c) in self.taylor.iter().enumerate() {
                if m > 0 {
                    pw *= s;
                    bound *= s * self.c_max / m as f64;
                }
                sum += c * pw;
                if m > self.ell as usize + 1 && bound <= 1e-18 * sum.abs() {
                    break;
                }
            }
            return Ok(sum);
        }
        let num: f64 = self.a.iter().zip(&self.b).map(|(a, b)| -(-s * a).exp() * (-s * (b - a)).exp_m1()).sum();
        Ok(num / s.powi(ell + 1))
    }
}

pub fn g_ell(pair: &SequencePair, ell: u32, s: f64) -> Result<f64> {
    GKernel::new(pair, ell)?.eval(s)
}

/// `(g_ell(s), (1/ell!) * Laplace[rho_ell](s), |difference|)`.
pub fn laplace_rho_identity(pair: &SequencePair, ell: u32, s: f64) -> Result<(f64, f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::InvalidInput("Laplace identity needs s > 0".into()));
    }
    let lhs = g_ell(pair, ell, s)?;
    let rhs = build_rho(pair, ell)?.laplace(s) / factorial(ell);
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `h(s) = sum mult e^{-lambda s}`.
    H,
    /// `xi(s) = sum mult e^{-lambda^2 s}`.
    Xi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    pub trunc_error_bound: f64,
    pub terms_used: usize,
}

pub const MAX_KERNEL_TERMS: usize = 5_000_000;

/// Partial sums of `h` or `xi` over the zero stream, stopped once a
/// ratio-test bound on the remainder drops below `tol * |sum|`.
pub fn kernel_series(model: &EntireModel, kind: KernelKind, s: f64, tol: f64) -> Result<KernelEval> {
    stream_series(&model.zeros, kind, s, tol)
}

pub fn stream_series(zeros: &ZeroStream, kind: KernelKind, s: f64, tol: f64) -> Result<KernelEval> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("kernel needs s > 0, got {s}")));
    }
    let power = match kind {
        KernelKind::H => 1,
        KernelKind::Xi => 2,
    };
    match zeros {
        ZeroStream::Finite { zeros: list, complete } => {
            if !complete {
                return Err(Error::InsufficientZeros {
                    known: zeros.known_limit().map(|l| rational::format_rational(&l)).unwrap_or_default(),
                    needed: "infinity".into(),
                });
            }
            let value = list
                .iter()
                .map(|(l, m)| rational::to_f64(m) * (-s * rational::to_f64(l).powi(power)).exp())
                .sum();
            Ok(KernelEval { value, trunc_error_bound: 0.0, terms_used: list.len() })
        }
        ZeroStream::Lattice { .. } => {
            let lp = zeros.lattice_f64().expect("lattice");
            let e = lp.exponent as i32 * power;
            let d = lp.mult.iter().rposition(|&c| c != 0.0).unwrap_or(0) as i32;
            let abs_mult = |k: i64| lp.mult.iter().rev().fold(0.0, |acc, c| acc * (k as f64).abs() + c.abs());
            let lambda = |k: i64| (k as f64 + lp.shift).powi(e);
            let mut sum = 0.0;
            let mut k = lp.start;
            let mut terms = 0usize;
            loop {
                sum += lp.mult_at(k) * (-s * lambda(k)).exp();
                terms += 1;
                let next = k + 1;
                if next >= 1 {
                    let gap = lambda(next + 1) - lambda(next);
                    let r = ((next + 1) as f64 / next as f64).powi(d) * (-s * gap).exp();
                    if r < 1.0 {
                        let bound = abs_mult(next) * (-s * lambda(next)).exp() / (1.0 - r);
                        if bound <= tol * sum.abs() || bound == 0.0 {
                            return Ok(KernelEval { value: sum, trunc_error_bound: bound, terms_used: terms });
                        }
                        if terms >= MAX_KERNEL_TERMS {
                            return Err(Error::Budget { terms, best: sum, bound });
                        }
                    }
                }
                if terms >= MAX_KERNEL_TERMS {
                    return Err(Error::Budget { terms, best: sum, bound: f64::INFINITY });
                }
                k = next;
            }
        }
    }
}

/// Closed form of `h` for a linear lattice:
/// `h(s) = e^{-(k0+c)s} N(e^{-s}) / (1 - e^{-s})^(d+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedKernel {
    offset: f64,
    numerator: Vec<f64>,
    power: i32,
}

impl ClosedKernel {
    pub fn from_stream(zeros: &ZeroStream) -> Option<ClosedKernel> {
        let ZeroStream::Lattice { shift, exponent: 1, start, mult } = zeros else {
            return None;
        };
        let d = mult.degree().unwrap_or(0);
        let q = |i: i64| mult.eval(&rational::int(i + start));
        // n_i = sum_t (-1)^t C(d+1, t) Q(i - t): the (d+1)-th difference
        // vanishes beyond degree d.
        let mut numerator = Vec::with_capacity(d + 1);
        for i in 0..=d as i64 {
            let mut acc = Rational::zero();
            let mut binom = Rational::from_integer(1.into());
            for t in 0..=i.min(d as i64 + 1) {
                let term = &binom * q(i - t);
                if t % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
                binom = binom * rational::int(d as i64 + 1 - t) / rational::int(t + 1);
            }
            numerator.push(acc.to_f64().unwrap_or(f64::NAN));
        }
        Some(ClosedKernel {
            offset: rational::to_f64(shift) + *start as f64,
            numerator,
            power: d as i32 + 1,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.weighted(s, 0)
    }

    /// `s^q h(s)`, evaluated without cancellation for small `s`.
    pub fn weighted(&self, s: f64, q: i32) -> f64 {
        let w = (-s).exp();
        let n = self.numerator.iter().rev().fold(0.0, |acc, c| acc * w + c);
        let ratio = if s < 1e-300 { 1.0 } else { s / -(-s).exp_m1() };
        (-self.offset * s).exp() * n * ratio.powi(self.power) * s.powi(q - self.power)
    }
}

/// Closed `h` for models whose zeros form a linear lattice.
pub fn closed_h(model: &EntireModel) -> Option<ClosedKernel> {
    ClosedKernel::from_stream(&model.zeros)
}

/// Below this `s` a quadratic lattice kernel is summed by Euler–Maclaurin
/// instead of term by term; the trapezoid error there is of order
/// `e^(-pi^2 / s)`.
const GAUSSIAN_EM_MAX_S: f64 = 0.1;

/// `sum_{k >= k0} P(k) e^{-s (k+c)^2}` by Euler–Maclaurin at `u0 = k0 + c`:
/// the integral in incomplete gamma functions plus endpoint corrections.
fn gaussian_lattice_sum(mult: &[f64], c: f64, k0: i64, s: f64) -> Result<f64> {
    let u0 = k0 as f64 + c;
    // Q(u) = P(u - c)
    let q = shift_coeffs(mult, -c);
    let z = s * u0 * u0;
    let mut integral = 0.0;
    for (r, &coef) in q.iter().enumerate() {
        if coef != 0.0 {
            let a = (r as f64 + 1.0) / 2.0;
            integral += coef * 0.5 * s.powf(-a) * gamma_upper(a, z)?;
        }
    }
    let gauss = (-z).exp();
    let eval = |p: &[f64]| p.iter().rev().fold(0.0, |acc, v| acc * u0 + v);
    let mut total = integral + 0.5 * eval(&q) * gauss;
    // f^(n) = R_n(u) e^{-s u^2}, R_{n+1} = R_n' - 2 s u R_n
    let mut r = q;
    for n in 1..=39usize {
        let mut next = vec![0.0; r.len() + 1];
        for (i, &v) in r.iter().enumerate() {
            if i > 0 {
                next[i - 1] += i as f64 * v;
            }
            next[i + 1] -= 2.0 * s * v;
        }
        r = next;
        if n % 2 == 1 {
            let j = (n + 1) as u32;
            let term = bernoulli(j as usize) / factorial(j) * eval(&r) * gauss;
            total -= term;
            if term.abs() <= 1e-17 * total.abs() && n > 3 {
                break;
            }
        }
    }
    Ok(total)
}

/// `s^q * kernel(s)` with the best available method.
#[derive(Debug, Clone)]
pub enum WeightedKernel {
    Closed(ClosedKernel),
    Series { zeros: ZeroStream, kind: KernelKind, tol: f64 },
}

impl WeightedKernel {
    pub fn for_stream(zeros: &ZeroStream, kind: KernelKind, tol: f64) -> Result<WeightedKernel> {
        if zeros.known_limit().is_some() {
            return Err(Error::InsufficientZeros {
                known: rational::format_rational(&zeros.known_limit().unwrap()),
                needed: "infinity".into(),
            });
        }
        let effective = match kind {
            KernelKind::H => zeros.clone(),
            KernelKind::Xi => zeros.squared()?,
        };
        Ok(match ClosedKernel::from_stream(&effective) {
            Some(c) => WeightedKernel::Closed(c),
            None => WeightedKernel::Series { zeros: effective, kind: KernelKind::H, tol },
        })
    }

    pub fn eval(&self, s: f64, q: i32) -> Result<f64> {
        match self {
            WeightedKernel::Closed(c) => Ok(c.weighted(s, q)),
            WeightedKernel::Series { zeros, kind, tol } => {
                if let (KernelKind::H, ZeroStream::Lattice { exponent: 2, .. }) = (kind, zeros) {
                    if s > 0.0 && s <= GAUSSIAN_EM_MAX_S {
                        let lp = zeros.lattice_f64().expect("lattice");
                        return Ok(gaussian_lattice_sum(&lp.mult, lp.shift, lp.start, s)? * s.powi(q));
                    }
                }
                Ok(stream_series(zeros, *kind, s, *tol)?.value * s.powi(q))
            }
        }
    }
}
