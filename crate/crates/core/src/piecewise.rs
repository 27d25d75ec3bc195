//! Exact piecewise polynomials on the real line.
//!
//! A value is a list of breakpoints `t_0 < ... < t_K` and one polynomial per
//! breakpoint; piece `i` is valid on `[t_i, t_{i+1})`, the last one on
//! `[t_K, inf)`, and the function is zero left of `t_0`. Pieces are stored in
//! the global variable `t`; integration shifts them to local coordinates
//! exactly before converting to floating point.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::catalog::ZeroStream;
use crate::error::{Error, Result};
use crate::poly::{Poly, RootInterval};
use crate::rational::{self, Rational};
use crate::sequences::SequencePair;
use crate::special::factorial;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<Rational>,
    pieces: Vec<Poly>,
}

impl PiecewisePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_parts(breakpoints: Vec<Rational>, pieces: Vec<Poly>) -> Result<Self> {
        if breakpoints.len() != pieces.len() {
            return Err(Error::InvalidInput("one polynomial per breakpoint is required".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breakpoints, pieces })
    }

    /// `sum_i w_i (t - s_i)^ell 1_[s_i, inf)(t)`.
    pub fn from_shifted_powers(mut terms: Vec<(Rational, Rational)>, ell: u32) -> Self {
        terms.sort_by(|x, y| x.0.cmp(&y.0));
        let mut breakpoints = Vec::new();
        let mut pieces: Vec<Poly> = Vec::new();
        let mut current = Poly::zero();
        let mut i = 0;
        while i < terms.len() {
            let at = terms[i].0.clone();
            while i < terms.len() && terms[i].0 == at {
                let (s, w) = &terms[i];
                current = &current + &Poly::shifted_power(s, ell).scale(w);
                i += 1;
            }
            breakpoints.push(at);
            pieces.push(current.clone());
        }
        let mut out = Self { breakpoints, pieces };
        out.merge_equal_neighbours();
        out
    }

    fn merge_equal_neighbours(&mut self) {
        let mut bps = Vec::with_capacity(self.breakpoints.len());
        let mut pcs: Vec<Poly> = Vec::with_capacity(self.pieces.len());
        for (b, p) in self.breakpoints.drain(..).zip(self.pieces.drain(..)) {
            let prev_same = match pcs.last() {
                Some(last) => *last == p,
                None => p.is_zero(),
            };
            if !prev_same {
                bps.push(b);
                pcs.push(p);
            }
        }
        self.breakpoints = bps;
        self.pieces = pcs;
    }

    /// The same function on `(-inf, upper)` and zero from `upper` on.
    pub fn truncated(&self, upper: &Rational) -> Self {
        let mut bps = Vec::new();
        let mut pcs = Vec::new();
        for (b, p) in self.breakpoints.iter().zip(&self.pieces) {
            if b >= upper {
                break;
            }
            bps.push(b.clone());
            pcs.push(p.clone());
        }
        if !bps.is_empty() {
            bps.push(upper.clone());
            pcs.push(Poly::zero());
        }
        let mut out = Self { breakpoints: bps, pieces: pcs };
        out.merge_equal_neighbours();
        out
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.pieces.iter().all(Poly::is_zero)
    }

    fn piece_index(&self, t: &Rational) -> Option<usize> {
        match self.breakpoints.binary_search(t) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        match self.piece_index(t) {
            Some(i) => self.pieces[i].eval(t),
            None => Rational::zero(),
        }
    }

    /// Evaluation at a binary float. The argument is converted exactly, so
    /// this is exact up to the final rounding.
    pub fn eval_f64(&self, t: f64) -> f64 {
        match Rational::from_float(t) {
            Some(q) => rational::to_f64(&self.eval(&q)),
            None => f64::NAN,
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Poly::derivative).collect(),
        };
        out.merge_equal_neighbours();
        out
    }

    pub fn is_continuous(&self) -> bool {
        let mut prev = Poly::zero();
        for (b, p) in self.breakpoints.iter().zip(&self.pieces) {
            if prev.eval(b) != p.eval(b) {
                return false;
            }
            prev = p.clone();
        }
        true
    }

    /// The final piece, if non-zero, as `(start, poly in (t - start))`.
    pub fn unbounded_part(&self) -> Option<(Rational, Poly)> {
        let (b, p) = (self.breakpoints.last()?, self.pieces.last()?);
        if p.is_zero() {
            None
        } else {
            Some((b.clone(), p.taylor_shift(b)))
        }
    }

    /// `int_{-inf}^{upper} pp(u) u^j du` for `j = 0..=j_max`, exactly.
    /// Requires the function to vanish left of zero or the range to be finite,
    /// which always holds since the support starts at `t_0`.
    pub fn moments(&self, upper: &Rational, j_max: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); j_max + 1];
        for (i, (b, p)) in self.breakpoints.iter().zip(&self.pieces).enumerate() {
            if b >= upper || p.is_zero() {
                continue;
            }
            let end = match self.breakpoints.get(i + 1) {
                Some(e) if e < upper => e.clone(),
                _ => upper.clone(),
            };
            let mut q = p.clone();
            for slot in out.iter_mut() {
                *slot += q.definite_integral(b, &end);
                q = &q * &Poly::t();
            }
        }
        out
    }

    /// Iterates `(start, end, piece in local coordinates as floats)` over the
    /// non-zero pieces, clipped to `[lower, upper)`.
    fn local_pieces<'a>(
        &'a self,
        lower: &'a Rational,
        upper: Option<&'a Rational>,
    ) -> impl Iterator<Item = (Rational, Option<Rational>, Vec<f64>)> + 'a {
        self.breakpoints.iter().zip(&self.pieces).enumerate().filter_map(move |(i, (b, p))| {
            if p.is_zero() {
                return None;
            }
            let mut end = self.breakpoints.get(i + 1).cloned();
            if let Some(u) = upper {
                end = Some(match end {
                    Some(e) if &e < u => e,
                    _ => u.clone(),
                });
            }
            let start = if b < lower { lower.clone() } else { b.clone() };
            if let Some(e) = &end {
                if e <= &start {
                    return None;
                }
            }
            Some((start.clone(), end, p.taylor_shift(&start).to_f64_coeffs()))
        })
    }

    /// `int_0^inf e^{-st} pp(t) dt` for `s > 0`.
    pub fn laplace(&self, s: f64) -> f64 {
        assert!(s > 0.0, "Laplace transform needs s > 0");
        let zero = Rational::zero();
        let mut total = 0.0;
        for (start, end, q) in self.local_pieces(&zero, None) {
            let u = rational::to_f64(&start);
            let w = end.map(|e| rational::to_f64(&e) - u);
            let mut piece = 0.0;
            for (j, c) in q.iter().enumerate() {
                if *c != 0.0 {
                    piece += c * truncated_gamma_moment(j as u32, s, w);
                }
            }
            total += (-s * u).exp() * piece;
        }
        total
    }

    /// `int_0^upper pp(t) / (x + t)^order dt`; `upper = None` means infinity.
    pub fn stieltjes(&self, x: f64, order: u32, upper: Option<&Rational>) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidInput(format!("Stieltjes integral needs x > 0, got {x}")));
        }
        if order < 1 {
            return Err(Error::InvalidInput("Stieltjes order must be positive".into()));
        }
        let zero = Rational::zero();
        let sigma = order as i64;
        let mut total = 0.0;
        for (start, end, q) in self.local_pieces(&zero, upper) {
            let big_x = x + rational::to_f64(&start);
            let z = end.map(|e| (rational::to_f64(&e) - rational::to_f64(&start)) / big_x);
            let mut piece = 0.0;
            for (j, c) in q.iter().enumerate() {
                if *c == 0.0 {
                    continue;
                }
                let j = j as i64;
                let jz = match z {
                    Some(z) => beta_partial(j, sigma, z),
                    None => {
                        if sigma < j + 2 {
                            return Err(Error::Divergent(format!(
                                "integral of t^{j} / (x+t)^{sigma} over an unbounded piece"
                            )));
                        }
                        factorial(j as u32) * factorial((sigma - j - 2) as u32) / factorial((sigma - 1) as u32)
                    }
                };
                piece += c * big_x.powi((j + 1 - sigma) as i32) * jz;
            }
            total += piece;
        }
        Ok(total)
    }

    /// Exact samples at `lo, lo + step, ...` up to and including `hi`.
    pub fn sample(&self, lo: &Rational, hi: &Rational, step: &Rational) -> Result<Vec<(Rational, Rational)>> {
        if !step.is_positive() {
            return Err(Error::InvalidInput("sampling step must be positive".into()));
        }
        let count = ((hi - lo) / step).floor();
        if count.is_negative() || count > rational::int(10_000_000) {
            return Err(Error::InvalidInput("sampling range is empty or too large".into()));
        }
        let count = rational::floor_to_i64(&count).unwrap_or(0);
        Ok((0..=count)
            .map(|i| {
                let t = lo + step * rational::int(i);
                let v = self.eval(&t);
                (t, v)
            })
            .collect())
    }
}

/// `int_0^w tau^j e^{-s tau} d tau` (`w = None` is infinity).
fn truncated_gamma_moment(j: u32, s: f64, w: Option<f64>) -> f64 {
    let full = factorial(j) / s.powi(j as i32 + 1);
    let Some(w) = w else { return full };
    let x = s * w;
    // Regularised lower incomplete gamma P(j+1, x).
    let p = if x < 2.0 * (j as f64 + 1.0) {
        // e^{-x} sum_{i > j} x^i / i!, no cancellation
        let mut term = (-x).exp();
        for i in 1..=j {
            term *= x / i as f64;
        }
        let mut sum = 0.0;
        let mut i = j + 1;
        loop {
            term *= x / i as f64;
            sum += term;
            if term <= 1e-18 * sum || i > j + 400 {
                break;
            }
            i += 1;
        }
        sum
    } else {
        let mut term = 1.0;
        let mut partial = 1.0;
        for i in 1..=j {
            term *= x / i as f64;
            partial += term;
        }
        1.0 - (-x).exp() * partial
    };
    full * p
}

/// `int_0^z v^j (1 + v)^{-sigma} dv`.
fn beta_partial(j: i64, sigma: i64, z: f64) -> f64 {
    if z <= 0.5 {
        // binomial series, ratio at most ~z
        let mut coeff = 1.0; // binom(-sigma, k)
        let mut zp = z.powi(j as i32 + 1);
        let mut sum = 0.0;
        for k in 0..400i64 {
            let term = coeff * zp / (j + k + 1) as f64;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() && k > 2 {
                break;
            }
            coeff *= -(sigma + k) as f64 / (k + 1) as f64;
            zp *= z;
        }
        sum
    } else {
        // (y-1)^j expanded, integrated over y in [1, 1+z]
        let y1 = 1.0 + z;
        let mut sum = 0.0;
        let mut binom = 1.0;
        for i in 0..=j {
            let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
            let e = i - sigma;
            let k = if e == -1 {
                y1.ln()
            } else {
                (y1.powi((e + 1) as i32) - 1.0) / (e + 1) as f64
            };
            sum += sign * binom * k;
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        sum
    }
}

/// `rho_ell` for a pair: `sum (t-a_k)^ell 1[a_k,inf) - sum (t-b_k)^ell 1[b_k,inf)`.
pub fn build_rho(pair: &SequencePair, ell: u32) -> Result<PiecewisePolynomial> {
    if ell == 0 {
        return Err(Error::InvalidInput(
            "rho_0 is a step function and is not represented; use ell >= 1".into(),
        ));
    }
    let mut terms = Vec::with_capacity(2 * pair.len());
    for a in pair.a() {
        terms.push((a.clone(), Rational::one()));
    }
    for b in pair.b() {
        terms.push((b.clone(), -Rational::one()));
    }
    Ok(PiecewisePolynomial::from_shifted_powers(terms, ell))
}

/// `sum_m mult_m rho_ell(t - lambda_m)` over the given zeros, on the whole line.
pub fn build_phi_from_zeros(pair: &SequencePair, ell: u32, zeros: &[(Rational, Rational)]) -> Result<PiecewisePolynomial> {
    if ell == 0 {
        return Err(Error::InvalidInput("phi needs ell >= 1".into()));
    }
    let mut terms = Vec::with_capacity(2 * pair.len() * zeros.len());
    for (lambda, mult) in zeros {
        for a in pair.a() {
            terms.push((lambda + a, mult.clone()));
        }
        for b in pair.b() {
            terms.push((lambda + b, -mult.clone()));
        }
    }
    Ok(PiecewisePolynomial::from_shifted_powers(terms, ell))
}

/// `phi_ell`, exact on `[0, t_max]`: only zeros `<= t_max` contribute there
/// because `rho_ell` vanishes left of `min(a_1, b_1) >= 0`. Right of `t_max`
/// the result is the partial sum over those zeros.
pub fn build_phi(pair: &SequencePair, ell: u32, zeros: &ZeroStream, t_max: &Rational) -> Result<PiecewisePolynomial> {
    if !t_max.is_positive() {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    zeros.require_known(t_max)?;
    let head = zeros.zeros_up_to(t_max)?;
    build_phi_from_zeros(pair, ell, &head)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StieltjesValue {
    pub value: f64,
    pub converged: bool,
    pub t_max_used: f64,
}

/// `int_0^T pp(t)/(x+t)^order dt` with `T` doubled from `t_max` until the
/// relative change drops below `tol`.
pub fn stieltjes_integral(pp: &PiecewisePolynomial, x: f64, order: u32, t_max: &Rational, tol: f64) -> Result<StieltjesValue> {
    if order < 2 {
        return Err(Error::InvalidInput("order must be at least 2".into()));
    }
    if !t_max.is_positive() {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    let two = rational::int(2);
    let mut t = t_max.clone();
    let mut prev = pp.stieltjes(x, order, Some(&t))?;
    for _ in 0..64 {
        t = &t * &two;
        let cur = pp.stieltjes(x, order, Some(&t))?;
        let scale = cur.abs().max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= tol * scale || cur == prev {
            return Ok(StieltjesValue { value: cur, converged: true, t_max_used: rational::to_f64(&t) });
        }
        prev = cur;
    }
    Ok(StieltjesValue { value: prev, converged: false, t_max_used: rational::to_f64(&t) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PieceVerdict {
    Zero,
    /// Non-negative on the whole piece; `positive_at` is a point where the
    /// value is strictly positive, if any.
    Nonnegative { positive_at: Option<String> },
    Negative { at: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCertificate {
    pub start: String,
    /// `None` for the unbounded final piece.
    pub end: Option<String>,
    #[serde(flatten)]
    pub verdict: PieceVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignCertificate {
    pub nonnegative: bool,
    /// First point found with a negative value.
    #[serde(skip)]
    pub witness: Option<Rational>,
    pub witness_text: Option<String>,
    pub witness_value: Option<String>,
    pub pieces: Vec<PieceCertificate>,
}

/// A point in `(a, r)` where `r` is the first root of `sf` right of `a`
/// (or `b` if there is none in `(a, b]`).
fn point_in_gap(sf: &Poly, a: &Rational, b: &Rational) -> Rational {
    let two = rational::int(2);
    let mut m = b.clone();
    while sf.count_roots(a, &m) > 0 {
        m = (a + &m) / &two;
    }
    (a + &m) / &two
}

/// A point right of the isolated root and left of `limit` (and of any
/// further root).
fn point_after_root(sf: &Poly, root: &RootInterval, limit: &Rational) -> Rational {
    let two = rational::int(2);
    match root {
        RootInterval::Exact(r) => point_in_gap(sf, r, limit),
        RootInterval::Open { lo, hi } => {
            if hi < limit {
                return hi.clone();
            }
            let (mut lo, hi) = (lo.clone(), hi.clone());
            loop {
                let mid = (&lo + &hi) / &two;
                if sf.eval(&mid).is_zero() {
                    return point_in_gap(sf, &mid, limit);
                }
                if sf.count_roots(&lo, &mid) == 1 {
                    return mid;
                }
                lo = mid;
            }
        }
    }
}

/// Points covering every sign region of `p` on `[start, end)` (or
/// `[start, inf)`), left to right, with the sign there.
fn sign_samples(p: &Poly, start: &Rational, end: Option<&Rational>) -> Vec<(Rational, i32)> {
    let mut out = vec![(start.clone(), p.sign_at(start))];
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let sf = p.square_free();
    let hi = match end {
        Some(e) => e.clone(),
        None => {
            let c = sf.cauchy_bound();
            (if &c > start { c } else { start.clone() }) + Rational::one()
        }
    };
    let roots: Vec<RootInterval> = sf
        .isolate_roots(start, &hi)
        .into_iter()
        .filter(|r| !(end.is_some() && matches!(r, RootInterval::Exact(x) if x == &hi)))
        .collect();
    let first_limit = roots.first().map(|r| r.hi().clone()).unwrap_or_else(|| hi.clone());
    let before = point_in_gap(&sf, start, &first_limit);
    out.push((before.clone(), p.sign_at(&before)));
    for r in &roots {
        if let RootInterval::Exact(x) = r {
            out.push((x.clone(), 0));
        }
        let after = point_after_root(&sf, r, &hi);
        out.push((after.clone(), p.sign_at(&after)));
    }
    if end.is_none() {
        out.push((hi.clone(), p.sign_at(&hi)));
    }
    out
}

/// Exact decision whether `pp >= 0` everywhere.
pub fn certify_nonnegative(pp: &PiecewisePolynomial) -> SignCertificate {
    // Cheap pre-filter: the midpoint of each bounded piece and one point
    // past the last breakpoint.
    let mut witness: Option<Rational> = None;
    let two = rational::int(2);
    for (i, (b, p)) in pp.breakpoints.iter().zip(&pp.pieces).enumerate() {
        let probe = match pp.breakpoints.get(i + 1) {
            Some(e) => (b + e) / &two,
            None => b + Rational::one(),
        };
        if p.sign_at(&probe) < 0 {
            witness = Some(probe);
            break;
        }
    }

    let mut pieces = Vec::with_capacity(pp.pieces.len());
    for (i, (b, p)) in pp.breakpoints.iter().zip(&pp.pieces).enumerate() {
        let end = pp.breakpoints.get(i + 1);
        let verdict = if p.is_zero() {
            PieceVerdict::Zero
        } else {
            let samples = sign_samples(p, b, end);
            match samples.iter().find(|(_, s)| *s < 0) {
                Some((t, _)) => {
                    if witness.is_none() {
                        witness = Some(t.clone());
                    }
                    PieceVerdict::Negative { at: rational::format_rational(t) }
                }
                None => PieceVerdict::Nonnegative {
                    positive_at: samples.iter().find(|(_, s)| *s > 0).map(|(t, _)| rational::format_rational(t)),
                },
            }
        };
        pieces.push(PieceCertificate {
            start: rational::format_rational(b),
            end: end.map(rational::format_rational),
            verdict,
        });
    }
    let nonnegative = !pieces.iter().any(|c| matches!(c.verdict, PieceVerdict::Negative { .. }));
    debug_assert_eq!(nonnegative, witness.is_none());
    SignCertificate {
        nonnegative,
        witness_text: witness.as_ref().map(rational::format_rational),
        witness_value: witness.as_ref().map(|w| rational::format_rational(&pp.eval(w))),
        witness,
        pieces,
    }
}

/// Sign changes of the derivative, scanning the whole line left to right.
pub fn monotonicity_changes(pp: &PiecewisePolynomial) -> usize {
    let d = pp.derivative();
    let mut last = 0;
    let mut changes = 0;
    for (i, (b, p)) in d.breakpoints.iter().zip(&d.pieces).enumerate() {
        if p.is_zero() {
            continue;
        }
        for (_, s) in sign_samples(p, b, d.breakpoints.get(i + 1)) {
            if s != 0 {
                if last != 0 && s != last {
                    changes += 1;
                }
                last = s;
            }
        }
    }
    changes
}
