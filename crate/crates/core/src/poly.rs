//! Dense univariate polynomials with exact rational coefficients.
//!
//! Besides ring arithmetic this provides what the sign certificates need:
//! Taylor shifts, square-free parts, Sturm sequences and real-root isolation
//! on half-open rational intervals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    /// Ascending powers, no trailing zeros.
    coeffs: Vec<Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => rational::format_rational(c),
                1 => format!("{}*t", rational::format_rational(c)),
                _ => format!("{}*t^{i}", rational::format_rational(c)),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// An interval `(lo, hi]` holding exactly one distinct real root, or the
/// exact root when bisection happened to land on it.
#[derive(Debug, Clone, PartialEq)]
pub enum RootInterval {
    Exact(Rational),
    Open { lo: Rational, hi: Rational },
}

impl RootInterval {
    pub fn lo(&self) -> &Rational {
        match self {
            RootInterval::Exact(r) => r,
            RootInterval::Open { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &Rational {
        match self {
            RootInterval::Exact(r) => r,
            RootInterval::Open { hi, .. } => hi,
        }
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Poly::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::from_coeffs(coeffs.iter().map(|&c| rational::int(c)).collect())
    }

    /// `(t - root)^power`.
    pub fn shifted_power(root: &Rational, power: u32) -> Self {
        let base = Poly::from_coeffs(vec![-root.clone(), Rational::one()]);
        base.pow(power)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + rational::to_f64(c);
        }
        acc
    }

    pub fn sign_at(&self, t: &Rational) -> i32 {
        let v = self.eval(t);
        if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rational::int(i as i64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / rational::int(i as i64 + 1));
        }
        Poly::from_coeffs(out)
    }

    /// Exact integral over `[lo, hi]`.
    pub fn definite_integral(&self, lo: &Rational, hi: &Rational) -> Rational {
        let anti = self.integral();
        anti.eval(hi) - anti.eval(lo)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `p(t + c)`, computed by Horner's scheme on polynomials.
    pub fn taylor_shift(&self, c: &Rational) -> Poly {
        let lin = Poly::from_coeffs(vec![c.clone(), Rational::one()]);
        let mut acc = Poly::zero();
        for coef in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(coef.clone());
        }
        acc
    }

    /// Float coefficients of `p(t + c)` for a float shift. Used when the shift
    /// is not rational (evaluation points of the numerical routines).
    pub fn taylor_shift_f64(&self, c: f64) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut a: Vec<f64> = self.coeffs.iter().map(rational::to_f64).collect();
        // Repeated synthetic division.
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                a[j] += c * a[j + 1];
            }
        }
        a
    }

    /// Euclidean division, `self = q * d + r`.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lead = d.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some(l) => self.scale(&(Rational::one() / l)),
            None => Poly::zero(),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn square_free(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Sturm chain with each member rescaled to a content-free form so the
    /// coefficients stay small.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone()];
        if self.degree().unwrap_or(0) == 0 {
            return seq;
        }
        seq.push(self.derivative());
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.normalised_abs().neg());
        }
        seq
    }

    fn normalised_abs(&self) -> Poly {
        // Positive scaling keeps Sturm signs intact.
        match self.leading() {
            Some(l) => self.scale(&(Rational::one() / l.abs())),
            None => Poly::zero(),
        }
    }

    /// Distinct real roots in `(lo, hi]`.
    pub fn count_roots(&self, lo: &Rational, hi: &Rational) -> usize {
        if self.is_zero() {
            panic!("count_roots on the zero polynomial");
        }
        let seq = self.square_free().sturm_sequence();
        let v_lo = sign_variations(&seq, lo);
        let v_hi = sign_variations(&seq, hi);
        v_lo.saturating_sub(v_hi)
    }

    /// Upper bound on the absolute value of every real root.
    pub fn cauchy_bound(&self) -> Rational {
        let Some(lead) = self.leading() else {
            return Rational::zero();
        };
        let max_ratio = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(Rational::zero(), |m, v| if v > m { v } else { m });
        Rational::one() + max_ratio
    }

    /// Isolates each distinct real root in `(lo, hi]` into its own interval,
    /// sorted left to right.
    pub fn isolate_roots(&self, lo: &Rational, hi: &Rational) -> Vec<RootInterval> {
        assert!(!self.is_zero(), "isolate_roots on the zero polynomial");
        let sf = self.square_free();
        if sf.degree().unwrap_or(0) == 0 || lo >= hi {
            return Vec::new();
        }
        let seq = sf.sturm_sequence();
        let mut out = Vec::new();
        let mut stack = vec![(lo.clone(), hi.clone())];
        let two = rational::int(2);
        while let Some((a, b)) = stack.pop() {
            let count = sign_variations(&seq, &a).saturating_sub(sign_variations(&seq, &b));
            match count {
                0 => {}
                1 => {
                    if sf.eval(&b).is_zero() {
                        out.push(RootInterval::Exact(b));
                    } else {
                        out.push(RootInterval::Open { lo: a, hi: b });
                    }
                }
                _ => {
                    let mid = (&a + &b) / &two;
                    stack.push((mid.clone(), b));
                    stack.push((a, mid));
                }
            }
        }
        out.sort_by(|x, y| x.lo().cmp(y.lo()));
        out
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational::to_f64).collect()
    }

    /// Coefficients scaled to coprime integers (positive multiple).
    pub fn primitive_integer_coeffs(&self) -> Vec<BigInt> {
        let den = rational::common_denominator(self.coeffs.iter());
        self.coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
            .collect()
    }
}

fn sign_variations(seq: &[Poly], t: &Rational) -> usize {
    let mut last = 0;
    let mut count = 0;
    for p in seq {
        let s = p.sign_at(t);
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::from_coeffs(out)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.into_iter().map(|c| -c).collect())
    }
}
