//! Entire functions `f` of finite genus with zeros at `-lambda_k <= 0`,
//! described by their zero streams, plus the direct oracles used to
//! cross-check the series machinery.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::sequences::SequencePair;
use crate::special;

/// Hard cap on the number of zeros materialised in one call.
pub const MAX_MATERIALISED_ZEROS: usize = 5_000_000;

/// Non-decreasing stream of `(lambda, multiplicity)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroStream {
    /// Finitely many zeros. When `complete` is false the list is only a
    /// prefix of an unknown longer stream.
    Finite { zeros: Vec<(Rational, Rational)>, complete: bool },
    /// `lambda_k = (k + shift)^exponent` with multiplicity `mult(k)` for
    /// `k >= start`; `exponent` is 1 or 2.
    Lattice { shift: Rational, exponent: u32, start: i64, mult: Poly },
}

fn is_nonneg_integer(q: &Rational) -> bool {
    q.is_integer() && !q.is_negative()
}

impl ZeroStream {
    pub fn finite(zeros: Vec<(Rational, Rational)>, complete: bool) -> Result<Self> {
        let mut zs: Vec<(Rational, Rational)> = Vec::with_capacity(zeros.len());
        let mut sorted = zeros;
        sorted.sort_by(|x, y| x.0.cmp(&y.0));
        for (lambda, mult) in sorted {
            if lambda.is_negative() {
                return Err(Error::InvalidInput(format!(
                    "zero location lambda = {} must be non-negative",
                    rational::format_rational(&lambda)
                )));
            }
            if !is_nonneg_integer(&mult) || mult.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "multiplicity {} must be a positive integer",
                    rational::format_rational(&mult)
                )));
            }
            match zs.last_mut() {
                Some(last) if last.0 == lambda => last.1 += mult,
                _ => zs.push((lambda, mult)),
            }
        }
        Ok(ZeroStream::Finite { zeros: zs, complete })
    }

    pub fn lattice(shift: Rational, exponent: u32, start: i64, mult: Poly) -> Result<Self> {
        if exponent != 1 && exponent != 2 {
            return Err(Error::InvalidInput("lattice exponent must be 1 or 2".into()));
        }
        if (rational::int(start) + &shift).is_negative() {
            return Err(Error::InvalidInput("lattice must start at k + shift >= 0".into()));
        }
        if mult.is_zero() {
            return Err(Error::InvalidInput("multiplicity rule is identically zero".into()));
        }
        if mult.leading().is_none_or(|l| l.is_negative()) {
            return Err(Error::InvalidInput("multiplicity rule must be eventually positive".into()));
        }
        // Integer-valued polynomials of degree d are determined by d+1
        // consecutive integer values; check a generous window.
        let window = mult.degree().unwrap_or(0) as i64 + 64;
        for k in start..start + window {
            let m = mult.eval(&rational::int(k));
            if !is_nonneg_integer(&m) {
                return Err(Error::InvalidInput(format!(
                    "multiplicity rule gives {} at k = {k}; expected a non-negative integer",
                    rational::format_rational(&m)
                )));
            }
        }
        Ok(ZeroStream::Lattice { shift, exponent, start, mult })
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, ZeroStream::Lattice { .. })
    }

    /// Largest `lambda` that is known, `None` if the stream is infinite or
    /// known to be complete.
    pub fn known_limit(&self) -> Option<Rational> {
        match self {
            ZeroStream::Finite { complete: false, zeros } => {
                Some(zeros.last().map(|z| z.0.clone()).unwrap_or_else(Rational::zero))
            }
            _ => None,
        }
    }

    pub fn require_known(&self, t: &Rational) -> Result<()> {
        match self.known_limit() {
            Some(limit) if &limit < t => Err(Error::InsufficientZeros {
                known: rational::format_rational(&limit),
                needed: rational::format_rational(t),
            }),
            _ => Ok(()),
        }
    }

    /// Total number of zeros is finite and fully known.
    pub fn is_complete_finite(&self) -> bool {
        matches!(self, ZeroStream::Finite { complete: true, .. })
    }

    fn lattice_lambda(shift: &Rational, exponent: u32, k: i64) -> Rational {
        rational::pow(&(rational::int(k) + shift), exponent)
    }

    /// All zeros with `lambda <= t`, in order; multiplicity-zero lattice
    /// points are skipped.
    pub fn zeros_up_to(&self, t: &Rational) -> Result<Vec<(Rational, Rational)>> {
        match self {
            ZeroStream::Finite { zeros, .. } => Ok(zeros.iter().filter(|z| &z.0 <= t).cloned().collect()),
            ZeroStream::Lattice { shift, exponent, start, mult } => {
                let mut out = Vec::new();
                let mut k = *start;
                loop {
                    let lambda = Self::lattice_lambda(shift, *exponent, k);
                    if &lambda > t {
                        break;
                    }
                    let m = mult.eval(&rational::int(k));
                    if !m.is_zero() {
                        out.push((lambda, m));
                    }
                    if out.len() > MAX_MATERIALISED_ZEROS {
                        return Err(Error::InvalidInput(format!(
                            "more than {MAX_MATERIALISED_ZEROS} zeros below {}",
                            rational::format_rational(t)
                        )));
                    }
                    k += 1;
                }
                Ok(out)
            }
        }
    }

    /// The first `count` zeros (fewer if the stream is finite).
    pub fn first_zeros(&self, count: usize) -> Vec<(Rational, Rational)> {
        match self {
            ZeroStream::Finite { zeros, .. } => zeros.iter().take(count).cloned().collect(),
            ZeroStream::Lattice { shift, exponent, start, mult } => {
                let mut out = Vec::with_capacity(count);
                let mut k = *start;
                while out.len() < count {
                    let m = mult.eval(&rational::int(k));
                    if !m.is_zero() {
                        out.push((Self::lattice_lambda(shift, *exponent, k), m));
                    }
                    k += 1;
                }
                out
            }
        }
    }

    /// The stream of squared locations `lambda^2`, same multiplicities.
    pub fn squared(&self) -> Result<ZeroStream> {
        match self {
            ZeroStream::Finite { zeros, complete } => {
                ZeroStream::finite(zeros.iter().map(|(l, m)| (l * l, m.clone())).collect(), *complete)
            }
            ZeroStream::Lattice { shift, exponent: 1, start, mult } => {
                ZeroStream::lattice(shift.clone(), 2, *start, mult.clone())
            }
            ZeroStream::Lattice { .. } => Err(Error::InvalidInput("cannot square a quadratic lattice".into())),
        }
    }

    /// Lattice parameters as floats: `(shift, exponent, start, mult coeffs)`.
    pub fn lattice_f64(&self) -> Option<LatticeParams> {
        match self {
            ZeroStream::Lattice { shift, exponent, start, mult } => Some(LatticeParams {
                shift: rational::to_f64(shift),
                exponent: *exponent,
                start: *start,
                mult: mult.to_f64_coeffs(),
            }),
            _ => None,
        }
    }

    /// Index of the first lattice point with `lambda > t`.
    pub fn lattice_index_after(&self, t: &Rational) -> Option<i64> {
        match self {
            ZeroStream::Lattice { shift, exponent, start, .. } => {
                let mut k = *start;
                // jump close, then walk
                let approx = match exponent {
                    1 => rational::to_f64(t) - rational::to_f64(shift),
                    _ => rational::to_f64(t).max(0.0).sqrt() - rational::to_f64(shift),
                };
                if approx.is_finite() && approx > k as f64 + 2.0 {
                    k = approx as i64 - 1;
                }
                while &Self::lattice_lambda(shift, *exponent, k) <= t {
                    k += 1;
                }
                while k > *start && &Self::lattice_lambda(shift, *exponent, k - 1) > t {
                    k -= 1;
                }
                Some(k)
            }
            _ => None,
        }
    }

    /// Degree of the multiplicity rule (0 for finite streams).
    pub fn growth_degree(&self) -> usize {
        match self {
            ZeroStream::Lattice { mult, .. } => mult.degree().unwrap_or(0),
            _ => 0,
        }
    }
}

/// Float view of a lattice stream for the series engines.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParams {
    pub shift: f64,
    pub exponent: u32,
    pub start: i64,
    /// Ascending coefficients of the multiplicity polynomial in `k`.
    pub mult: Vec<f64>,
}

impl LatticeParams {
    pub fn mult_at(&self, k: i64) -> f64 {
        self.mult.iter().rev().fold(0.0, |acc, c| acc * k as f64 + c)
    }

    pub fn lambda_at(&self, k: i64) -> f64 {
        (k as f64 + self.shift).powi(self.exponent as i32)
    }
}

/// Log-derivative oracles independent of the zero-series code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    /// `f(z) = 1/Gamma(z + shift)`.
    ReciprocalGamma { shift: f64 },
    /// `f(z) = G(z + shift)`.
    BarnesG { shift: f64 },
    /// `f(z) = prod (z + lambda)^mult` over a complete finite stream.
    FiniteProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntireModel {
    pub name: String,
    pub genus: u32,
    pub zeros: ZeroStream,
    pub oracle: Option<Oracle>,
}

/// Built-in model families.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    ReciprocalGamma,
    /// `1/Gamma(z+1)`, zeros `1, 2, 3, ...`.
    ReciprocalGammaShifted,
    /// `G(z)`, zero at `-k` of multiplicity `k + 1`.
    BarnesG,
    /// `G(z+1)`, zero at `-k` of multiplicity `k`, `k >= 1`.
    BarnesGShifted,
    /// `1/Gamma_N`, zero at `-k` of multiplicity `C(k+N-1, N-1)`.
    MultipleGamma(u32),
    /// `prod (z + lambda)`, genus 0.
    FiniteZeros(Vec<Rational>),
}

pub const MAX_MULTIPLE_GAMMA_ORDER: u32 = 12;

/// `C(k + n - 1, n - 1)` as a polynomial in `k`.
pub fn multiple_gamma_multiplicity(n: u32) -> Poly {
    let mut p = Poly::one();
    for i in 1..n {
        let factor = Poly::from_coeffs(vec![rational::ratio(i as i64, i as i64), Rational::zero()]);
        let lin = Poly::from_coeffs(vec![rational::int(i as i64), Rational::one()]);
        p = &(&p * &lin) * &factor;
        p = p.scale(&rational::ratio(1, i as i64));
    }
    p
}

pub fn make_model(kind: &ModelKind) -> Result<EntireModel> {
    let one = Poly::one();
    let lattice = |start: i64, mult: Poly| ZeroStream::lattice(Rational::zero(), 1, start, mult);
    Ok(match kind {
        ModelKind::ReciprocalGamma => EntireModel {
            name: "reciprocal_gamma".into(),
            genus: 1,
            zeros: lattice(0, one)?,
            oracle: Some(Oracle::ReciprocalGamma { shift: 0.0 }),
        },
        ModelKind::ReciprocalGammaShifted => EntireModel {
            name: "reciprocal_gamma_shifted".into(),
            genus: 1,
            zeros: lattice(1, one)?,
            oracle: Some(Oracle::ReciprocalGamma { shift: 1.0 }),
        },
        ModelKind::BarnesG => EntireModel {
            name: "barnes_g".into(),
            genus: 2,
            zeros: lattice(0, Poly::from_i64(&[1, 1]))?,
            oracle: Some(Oracle::BarnesG { shift: 0.0 }),
        },
        ModelKind::BarnesGShifted => EntireModel {
            name: "barnes_g_shifted".into(),
            genus: 2,
            zeros: lattice(1, Poly::from_i64(&[0, 1]))?,
            oracle: Some(Oracle::BarnesG { shift: 1.0 }),
        },
        ModelKind::MultipleGamma(n) => {
            if *n == 0 || *n > MAX_MULTIPLE_GAMMA_ORDER {
                return Err(Error::InvalidInput(format!(
                    "multiple_gamma order must be in 1..={MAX_MULTIPLE_GAMMA_ORDER}"
                )));
            }
            EntireModel {
                name: format!("multiple_gamma:{n}"),
                genus: *n,
                zeros: lattice(0, multiple_gamma_multiplicity(*n))?,
                // 1/Gamma_2 and G differ by an exponential factor, so only
                // N = 1 reuses the gamma oracle.
                oracle: (*n == 1).then_some(Oracle::ReciprocalGamma { shift: 0.0 }),
            }
        }
        ModelKind::FiniteZeros(list) => {
            let zs = list.iter().map(|l| (l.clone(), Rational::one())).collect();
            EntireModel {
                name: format!("finite:{}", list.iter().map(rational::format_rational).collect::<Vec<_>>().join(",")),
                genus: 0,
                zeros: ZeroStream::finite(zs, true)?,
                oracle: Some(Oracle::FiniteProduct),
            }
        }
    })
}

/// Parses `reciprocal_gamma`, `multiple_gamma:3`, `finite:1,1,4`, ...
pub fn parse_model_name(input: &str) -> Result<ModelKind> {
    let s = input.trim();
    if s.len() > 4096 {
        return Err(Error::Parse("model name too long".into()));
    }
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (s, None),
    };
    let no_arg = |k: ModelKind| match arg {
        None => Ok(k),
        Some(_) => Err(Error::Parse(format!("model '{head}' takes no argument"))),
    };
    match head {
        "reciprocal_gamma" | "gamma" => no_arg(ModelKind::ReciprocalGamma),
        "reciprocal_gamma_shifted" => no_arg(ModelKind::ReciprocalGammaShifted),
        "barnes_g" => no_arg(ModelKind::BarnesG),
        "barnes_g_shifted" => no_arg(ModelKind::BarnesGShifted),
        "multiple_gamma" => {
            let a = arg.ok_or_else(|| Error::Parse("multiple_gamma needs an order, e.g. multiple_gamma:2".into()))?;
            let n: u32 = a.parse().map_err(|_| Error::Parse(format!("'{a}' is not a valid order")))?;
            Ok(ModelKind::MultipleGamma(n))
        }
        "finite" => {
            let a = arg.ok_or_else(|| Error::Parse("finite needs a zero list, e.g. finite:1,1,4".into()))?;
            Ok(ModelKind::FiniteZeros(rational::parse_rational_list(a)?))
        }
        _ => Err(Error::Parse(format!("unknown model '{head}'"))),
    }
}

impl fmt::Display for EntireModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (genus {})", self.name, self.genus)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumberOrText {
    Number(serde_json::Number),
    Text(String),
}

impl NumberOrText {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            NumberOrText::Number(n) => rational::parse_rational(&n.to_string()),
            NumberOrText::Text(s) => rational::parse_rational(s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomModelSpec {
    genus: u32,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    zeros: Option<Vec<(NumberOrText, NumberOrText)>>,
    #[serde(default)]
    complete: Option<bool>,
    #[serde(default)]
    rule: Option<String>,
    #[serde(default)]
    start: Option<i64>,
}

pub const MAX_CUSTOM_GENUS: u32 = 12;

/// Parses a custom model:
/// `{"genus": 1, "zeros": [[0, 1], ["3/2", 2]], "complete": true}` or
/// `{"genus": 2, "rule": "lambda=k, mult=k+1", "start": 0}`.
pub fn parse_custom_model(json: &str) -> Result<EntireModel> {
    if json.len() > 1 << 20 {
        return Err(Error::Parse("model file too large".into()));
    }
    let spec: CustomModelSpec = serde_json::from_str(json).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
    if spec.genus > MAX_CUSTOM_GENUS {
        return Err(Error::InvalidInput(format!("genus must be at most {MAX_CUSTOM_GENUS}")));
    }
    let zeros = match (&spec.zeros, &spec.rule) {
        (Some(list), None) => {
            if spec.start.is_some() {
                return Err(Error::Parse("'start' only applies to 'rule'".into()));
            }
            let mut zs = Vec::with_capacity(list.len());
            for (l, m) in list {
                zs.push((l.to_rational()?, m.to_rational()?));
            }
            ZeroStream::finite(zs, spec.complete.unwrap_or(true))?
        }
        (None, Some(rule)) => {
            if spec.complete.is_some() {
                return Err(Error::Parse("'complete' only applies to 'zeros'".into()));
            }
            let (shift, exponent, mult) = parse_rule(rule)?;
            let start = spec.start.unwrap_or(0);
            if start.abs() > 1_000_000 {
                return Err(Error::InvalidInput("'start' out of range".into()));
            }
            let stream = ZeroStream::lattice(shift, exponent, start, mult.clone())?;
            let deg = mult.degree().unwrap_or(0) as i64;
            if deg + 1 >= exponent as i64 * (spec.genus as i64 + 1) {
                return Err(Error::InvalidInput(format!(
                    "zeros grow too slowly for genus {}: sum mult * lambda^-(p+1) diverges",
                    spec.genus
                )));
            }
            stream
        }
        _ => return Err(Error::Parse("give exactly one of 'zeros' or 'rule'".into())),
    };
    Ok(EntireModel {
        name: spec.name.unwrap_or_else(|| "custom".into()),
        genus: spec.genus,
        oracle: zeros.is_complete_finite().then_some(Oracle::FiniteProduct),
        zeros,
    })
}

/// `lambda=<k + c or (k + c)^2>, mult=<polynomial in k>`.
fn parse_rule(rule: &str) -> Result<(Rational, u32, Poly)> {
    let mut lambda = None;
    let mut mult = None;
    for part in rule.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("rule part '{}' is not key=value", part.trim())))?;
        let poly = parse_mult_expr(value)?;
        match key.trim() {
            "lambda" if lambda.is_none() => lambda = Some(poly),
            "mult" if mult.is_none() => mult = Some(poly),
            other => return Err(Error::Parse(format!("unexpected or repeated rule key '{other}'"))),
        }
    }
    let lambda = lambda.ok_or_else(|| Error::Parse("rule needs lambda=...".into()))?;
    let mult = mult.ok_or_else(|| Error::Parse("rule needs mult=...".into()))?;
    let one = Rational::one();
    match lambda.degree() {
        Some(1) if lambda.coeff(1) == one => Ok((lambda.coeff(0), 1, mult)),
        Some(2) if lambda.coeff(2) == one => {
            let c = lambda.coeff(1) / rational::int(2);
            if &c * &c == lambda.coeff(0) {
                Ok((c, 2, mult))
            } else {
                Err(Error::InvalidInput("quadratic lambda must be a perfect square (k + c)^2".into()))
            }
        }
        _ => Err(Error::InvalidInput("lambda must be k + c or (k + c)^2".into())),
    }
}

/// Parses a polynomial expression in `k`: numbers, `k`, `+ - * /`, `^` with
/// a non-negative integer exponent, parentheses and `binom(expr, n)`.
pub fn parse_mult_expr(input: &str) -> Result<Poly> {
    if input.len() > 1024 {
        return Err(Error::Parse("expression too long".into()));
    }
    let mut p = ExprParser { s: input.as_bytes(), pos: 0, depth: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(Error::Parse(format!("unexpected input at offset {} in '{}'", p.pos, input.trim())));
    }
    Ok(v)
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
    depth: usize,
}

const MAX_EXPR_DEGREE: usize = 64;
const MAX_EXPR_DEPTH: usize = 64;

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn check_degree(p: Poly) -> Result<Poly> {
        if p.degree().unwrap_or(0) > MAX_EXPR_DEGREE {
            return Err(Error::Parse(format!("expression degree exceeds {MAX_EXPR_DEGREE}")));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Poly> {
        self.depth += 1;
        if self.depth > MAX_EXPR_DEPTH {
            return Err(Error::Parse("expression nested too deeply".into()));
        }
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Self::check_degree(&acc * &self.unary()?)?;
            } else if self.eat(b'/') {
                let d = self.unary()?;
                if d.degree() != Some(0) {
                    return Err(Error::Parse("division only by non-zero constants".into()));
                }
                acc = acc.scale(&(Rational::one() / d.coeff(0)));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        if self.eat(b'-') {
            self.depth += 1;
            if self.depth > MAX_EXPR_DEPTH {
                return Err(Error::Parse("expression nested too deeply".into()));
            }
            let v = -self.unary()?;
            self.depth -= 1;
            return Ok(v);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.integer()?;
            if e as usize * base.degree().unwrap_or(0) > MAX_EXPR_DEGREE || e > 4096 {
                return Err(Error::Parse("exponent too large".into()));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos || self.pos - start > 6 {
            return Err(Error::Parse(format!("expected a small non-negative integer at offset {start}")));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse("bad integer".into()))
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(v)
            }
            Some(b'k') => {
                self.pos += 1;
                Ok(Poly::t())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                Ok(Poly::constant(rational::parse_rational(text)?))
            }
            Some(b'b') if self.s[self.pos..].starts_with(b"binom") => {
                self.pos += 5;
                if !self.eat(b'(') {
                    return Err(Error::Parse("binom needs '('".into()));
                }
                let x = self.expr()?;
                if !self.eat(b',') {
                    return Err(Error::Parse("binom needs two arguments".into()));
                }
                let n = self.integer()?;
                if !self.eat(b')') {
                    return Err(Error::Parse("missing ')' after binom".into()));
                }
                if n as usize * x.degree().unwrap_or(0) > MAX_EXPR_DEGREE || n > 4096 {
                    return Err(Error::Parse("binom degree too large".into()));
                }
                // x (x-1) ... (x-n+1) / n!
                let mut acc = Poly::one();
                for i in 0..n {
                    let factor = &x - &Poly::constant(rational::int(i as i64));
                    acc = (&acc * &factor).scale(&rational::ratio(1, i as i64 + 1));
                }
                Ok(acc)
            }
            Some(c) => Err(Error::Parse(format!("unexpected '{}' at offset {}", c as char, self.pos))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

/// `sum_{0 < lambda <= t} mult * lambda^{-p-1}`.
pub fn genus_sum(model: &EntireModel, t: &Rational) -> Result<f64> {
    let p = model.genus as i32 + 1;
    Ok(model
        .zeros
        .zeros_up_to(t)?
        .iter()
        .filter(|(l, _)| l.is_positive())
        .map(|(l, m)| rational::to_f64(m) * rational::to_f64(l).powi(-p))
        .sum())
}

impl EntireModel {
    /// `d^order/dz^order log f(z)` for real `z > 0`, up to a polynomial of
    /// degree at most `genus` (which cancels in every ratio used here).
    pub fn oracle_log_derivative(&self, order: u32, z: f64) -> Result<Option<f64>> {
        let Some(oracle) = self.oracle else { return Ok(None) };
        Ok(Some(match oracle {
            Oracle::ReciprocalGamma { shift } => {
                let w = z + shift;
                if order == 0 {
                    -special::ln_gamma(w)?
                } else {
                    -special::polygamma(order - 1, w)?
                }
            }
            Oracle::BarnesG { shift } => {
                let w = z + shift;
                match order {
                    0 => special::ln_abs_barnes_g(Complex64::new(w, 0.0))?,
                    1 => (w - 1.0) * special::digamma(w)? - w + 0.5 * (1.0 + (2.0 * std::f64::consts::PI).ln()),
                    j => {
                        let base = (j - 1) as f64 * special::polygamma(j - 2, w)?
                            + (w - 1.0) * special::polygamma(j - 1, w)?;
                        if j == 2 { base - 1.0 } else { base }
                    }
                }
            }
            Oracle::FiniteProduct => {
                let ZeroStream::Finite { zeros, .. } = &self.zeros else {
                    return Ok(None);
                };
                let mut s = 0.0;
                for (l, m) in zeros {
                    let y = z + rational::to_f64(l);
                    let m = rational::to_f64(m);
                    s += m * if order == 0 {
                        y.ln()
                    } else {
                        let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
                        sign * special::factorial(order - 1) / y.powi(order as i32)
                    };
                }
                s
            }
        }))
    }

    /// `log |f(z)|` for complex `z`, up to `Re q(z)` for a real polynomial
    /// `q` of degree at most `genus`.
    pub fn oracle_log_abs(&self, z: Complex64) -> Result<Option<f64>> {
        let Some(oracle) = self.oracle else { return Ok(None) };
        Ok(Some(match oracle {
            Oracle::ReciprocalGamma { shift } => -special::ln_abs_gamma(z + shift)?,
            Oracle::BarnesG { shift } => special::ln_abs_barnes_g(z + shift)?,
            Oracle::FiniteProduct => {
                let ZeroStream::Finite { zeros, .. } = &self.zeros else {
                    return Ok(None);
                };
                zeros
                    .iter()
                    .map(|(l, m)| rational::to_f64(m) * (z + rational::to_f64(l)).norm().ln())
                    .sum()
            }
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedShiftReport {
    pub verdict: Verdict,
    /// `sum_{k<=m} mu_b - sum_{k<=m} mu_a` for `m = 1..`.
    #[serde(serialize_with = "serialize_rationals")]
    pub trace: Vec<Rational>,
    /// The trace is constant over its second half. Informational only.
    pub eventually_stationary: bool,
    /// 1-based index of the first negative entry.
    pub first_violation: Option<usize>,
    pub examined: usize,
}

fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        seq.serialize_element(&rational::format_rational(q))?;
    }
    seq.end()
}

/// The first `depth` terms of the sorted multiset `{lambda + c}` over zeros
/// and `c` in `shifts`; fewer if a complete finite stream runs out. `None`
/// if the stream is an incomplete prefix that is too short.
fn merged_prefix(zeros: &ZeroStream, shifts: &[Rational], depth: usize) -> Result<Option<Vec<Rational>>> {
    let mut bound = shifts.iter().max().cloned().unwrap_or_else(Rational::zero) + rational::int(depth as i64 + 1);
    loop {
        let limit = zeros.known_limit();
        let zs = zeros.zeros_up_to(&bound)?;
        let mut items: Vec<(Rational, u64)> = Vec::new();
        for (l, m) in &zs {
            let m = m.to_u64().ok_or_else(|| Error::InvalidInput("multiplicity too large".into()))?;
            for c in shifts {
                let v = l + c;
                if v <= bound {
                    items.push((v, m));
                }
            }
        }
        items.sort_by(|x, y| x.0.cmp(&y.0));
        let mut out = Vec::with_capacity(depth);
        'fill: for (v, m) in items {
            for _ in 0..m {
                if out.len() == depth {
                    break 'fill;
                }
                out.push(v.clone());
            }
        }
        if out.len() == depth || zeros.is_complete_finite() {
            return Ok(Some(out));
        }
        if let Some(lim) = limit {
            // everything the prefix can provide with certainty
            if lim < bound {
                return Ok(None);
            }
        }
        bound = &bound * rational::int(2);
    }
}

/// Checks `b - Z_f ≺_w a - Z_f` on the first `depth` merged terms.
pub fn merged_shift_supermajorisation(pair: &SequencePair, model: &EntireModel, depth: usize) -> Result<MergedShiftReport> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if depth > 1_000_000 {
        return Err(Error::InvalidInput("depth too large".into()));
    }
    let ma = merged_prefix(&model.zeros, pair.a(), depth)?;
    let mb = merged_prefix(&model.zeros, pair.b(), depth)?;
    let (Some(ma), Some(mb)) = (ma, mb) else {
        return Ok(MergedShiftReport {
            verdict: Verdict::Inconclusive,
            trace: Vec::new(),
            eventually_stationary: false,
            first_violation: None,
            examined: 0,
        });
    };
    let mut trace = Vec::with_capacity(ma.len());
    let mut diff = Rational::zero();
    for (x, y) in ma.iter().zip(&mb) {
        diff += y - x;
        trace.push(diff.clone());
    }
    let first_violation = trace.iter().position(|d| d.is_negative()).map(|i| i + 1);
    let half = trace.len() / 2;
    let eventually_stationary = !trace.is_empty() && trace[half..].iter().all(|d| *d == trace[trace.len() - 1]);
    Ok(MergedShiftReport {
        verdict: if first_violation.is_some() { Verdict::Fail } else { Verdict::Pass },
        examined: trace.len(),
        trace,
        eventually_stationary,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn model(k: ModelKind) -> EntireModel {
        make_model(&k).unwrap()
    }

    #[test]
    fn multiplicities() {
        let g1 = model(ModelKind::MultipleGamma(1));
        let rg = model(ModelKind::ReciprocalGamma);
        assert_eq!(g1.zeros.first_zeros(20), rg.zeros.first_zeros(20));
        let g2 = model(ModelKind::MultipleGamma(2));
        for (k, (l, m)) in g2.zeros.first_zeros(10).into_iter().enumerate() {
            assert_eq!(l, int(k as i64));
            assert_eq!(m, int(k as i64 + 1));
        }
        let g4 = model(ModelKind::MultipleGamma(4));
        // C(k+3, 3)
        let expect = [1, 4, 10, 20, 35, 56];
        for (k, (_, m)) in g4.zeros.first_zeros(6).into_iter().enumerate() {
            assert_eq!(m, int(expect[k]));
        }
        assert!(make_model(&ModelKind::MultipleGamma(0)).is_err());
    }

    #[test]
    fn zeros_up_to_examples() {
        let rg = model(ModelKind::ReciprocalGamma);
        assert_eq!(rg.zeros.zeros_up_to(&ratio(5, 2)).unwrap(), vec![(int(0), int(1)), (int(1), int(1)), (int(2), int(1))]);
        let g = model(ModelKind::BarnesG);
        assert_eq!(g.zeros.zeros_up_to(&int(2)).unwrap(), vec![(int(0), int(1)), (int(1), int(2)), (int(2), int(3))]);
        let f = model(ModelKind::FiniteZeros(vec![int(1), int(1), int(4)]));
        assert_eq!(f.zeros.zeros_up_to(&int(3)).unwrap(), vec![(int(1), int(2))]);
        let gs = model(ModelKind::BarnesGShifted);
        assert_eq!(gs.zeros.first_zeros(2), vec![(int(1), int(1)), (int(2), int(2))]);
    }

    #[test]
    fn lattice_index_after() {
        let rg = model(ModelKind::ReciprocalGamma);
        assert_eq!(rg.zeros.lattice_index_after(&int(10)), Some(11));
        assert_eq!(rg.zeros.lattice_index_after(&ratio(21, 2)), Some(11));
        let sq = rg.zeros.squared().unwrap();
        assert_eq!(sq.lattice_index_after(&int(16)), Some(5));
        assert_eq!(sq.lattice_index_after(&int(1000)), Some(32));
    }

    #[test]
    fn model_names() {
        assert_eq!(parse_model_name("multiple_gamma:3").unwrap(), ModelKind::MultipleGamma(3));
        assert_eq!(parse_model_name("finite:1,1,4").unwrap(), ModelKind::FiniteZeros(vec![int(1), int(1), int(4)]));
        for bad in ["", "gamma:2", "multiple_gamma", "multiple_gamma:x", "finite:", "nope"] {
            assert!(parse_model_name(bad).unwrap_err().is_parse(), "{bad}");
        }
    }

    #[test]
    fn mult_expressions() {
        assert_eq!(parse_mult_expr("k+1").unwrap(), Poly::from_i64(&[1, 1]));
        assert_eq!(parse_mult_expr(" 2*k^2 - (k - 3) ").unwrap(), Poly::from_i64(&[3, -1, 2]));
        assert_eq!(parse_mult_expr("binom(k+2, 2)").unwrap(), multiple_gamma_multiplicity(3));
        assert_eq!(parse_mult_expr("k*(k+1)/2").unwrap(), parse_mult_expr("binom(k+1,2)").unwrap());
        assert_eq!(parse_mult_expr("-k").unwrap(), Poly::from_i64(&[0, -1]));
        assert_eq!(parse_mult_expr("3/2").unwrap(), Poly::constant(ratio(3, 2)));
        for bad in ["", "k+", "(k", "k/k", "x", "k^", "binom(k)", "k^99999", "1/0", "((((((((((((((((((((((((((((((((((((((((((((((((((((((((((((((((((k))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))))"] {
            assert!(parse_mult_expr(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn custom_models() {
        let m = parse_custom_model(r#"{"genus": 2, "rule": "lambda=k, mult=k+1", "start": 0}"#).unwrap();
        assert_eq!(m.zeros, model(ModelKind::BarnesG).zeros);
        let f = parse_custom_model(r#"{"genus": 0, "zeros": [[1, 2], ["3/2", 1], [1, 1]]}"#).unwrap();
        assert_eq!(f.zeros.zeros_up_to(&int(5)).unwrap(), vec![(int(1), int(3)), (ratio(3, 2), int(1))]);
        assert!(f.zeros.is_complete_finite());
        let q = parse_custom_model(r#"{"genus": 0, "rule": "lambda=(k+1)^2, mult=1"}"#).unwrap();
        assert_eq!(q.zeros.first_zeros(3), vec![(int(1), int(1)), (int(4), int(1)), (int(9), int(1))]);
        // divergent genus sum
        assert!(parse_custom_model(r#"{"genus": 1, "rule": "lambda=k, mult=k+1"}"#).is_err());
        assert!(parse_custom_model(r#"{"genus": 1, "rule": "lambda=k, mult=k/2"}"#).is_err());
        assert!(parse_custom_model(r#"{"genus": 1}"#).unwrap_err().is_parse());
        assert!(parse_custom_model(r#"{"genus": 1, "zeros": [[-1, 1]]}"#).is_err());
        assert!(parse_custom_model("not json").unwrap_err().is_parse());
        assert!(parse_custom_model(r#"{"genus": 1, "zeros": [], "extra": 1}"#).unwrap_err().is_parse());
    }

    #[test]
    fn genus_sums_are_bounded() {
        for kind in [
            ModelKind::ReciprocalGamma,
            ModelKind::BarnesG,
            ModelKind::BarnesGShifted,
            ModelKind::MultipleGamma(2),
            ModelKind::MultipleGamma(3),
        ] {
            let m = model(kind);
            let s: Vec<f64> = [100, 1000, 10000].iter().map(|&t| genus_sum(&m, &int(t)).unwrap()).collect();
            assert!(s[0] < s[1] && s[1] < s[2], "{}", m.name);
            // increments shrink: bounded growth
            assert!(s[2] - s[1] < s[1] - s[0], "{}", m.name);
            assert!(s[2] < 10.0, "{}", m.name);
        }
    }

    #[test]
    fn merged_shift_examples() {
        let p = SequencePair::from_i64(&[0, 3, 3], &[1, 1, 4]).unwrap();
        let r = merged_shift_supermajorisation(&p, &model(ModelKind::ReciprocalGammaShifted), 12).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let expect: Vec<Rational> = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0].iter().map(|&v| int(v)).collect();
        assert_eq!(r.trace, expect);
        assert!(r.eventually_stationary);

        let same = SequencePair::from_i64(&[1, 2], &[1, 2]).unwrap();
        let r = merged_shift_supermajorisation(&same, &model(ModelKind::BarnesG), 20).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.trace.iter().all(Zero::is_zero));

        let b = SequencePair::parse("0,3/2,3/2", "1/2,1/2,2").unwrap();
        let r = merged_shift_supermajorisation(&b, &model(ModelKind::BarnesGShifted), 30).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.trace);
        assert_eq!(r.examined, 30);

        let bad = SequencePair::from_i64(&[0, 4, 5], &[1, 2, 6]).unwrap();
        let r = merged_shift_supermajorisation(&bad, &model(ModelKind::FiniteZeros(vec![int(0)])), 3).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.first_violation, Some(2));

        let prefix = ZeroStream::finite(vec![(int(0), int(1))], false).unwrap();
        let m = EntireModel { name: "prefix".into(), genus: 1, zeros: prefix, oracle: None };
        assert_eq!(merged_shift_supermajorisation(&bad, &m, 10).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn oracle_barnes_derivatives_match_finite_differences() {
        let g = model(ModelKind::BarnesG);
        for &z in &[0.7, 1.5, 4.0, 12.0] {
            let h = 1e-4;
            let f = |x: f64| g.oracle_log_derivative(0, x).unwrap().unwrap();
            let d1 = (f(z + h) - f(z - h)) / (2.0 * h);
            let a1 = g.oracle_log_derivative(1, z).unwrap().unwrap();
            assert!((d1 - a1).abs() < 1e-7 * a1.abs().max(1.0), "z = {z}");
            let f1 = |x: f64| g.oracle_log_derivative(1, x).unwrap().unwrap();
            let d2 = (f1(z + h) - f1(z - h)) / (2.0 * h);
            let a2 = g.oracle_log_derivative(2, z).unwrap().unwrap();
            assert!((d2 - a2).abs() < 1e-7 * a2.abs().max(1.0), "z = {z}");
            let f2 = |x: f64| g.oracle_log_derivative(2, x).unwrap().unwrap();
            let d3 = (f2(z + h) - f2(z - h)) / (2.0 * h);
            let a3 = g.oracle_log_derivative(3, z).unwrap().unwrap();
            assert!((d3 - a3).abs() < 1e-6 * a3.abs().max(1.0), "z = {z}");
        }
    }
}
