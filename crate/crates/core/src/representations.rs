//! Three independent evaluations of `sign * d^k/dx^k log W_f(x)`: the zero
//! series, the Laplace integral `int e^{-sx} s^q h(s) g_ell(s) ds`, and the
//! Stieltjes integral `C int phi_ell(t) / (x+t)^(q+1) dt`, plus the harness
//! comparing them.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::catalog::{merged_shift_supermajorisation, EntireModel, Verdict, ZeroStream};
use crate::error::{Error, Result};
use crate::kernels::{GKernel, KernelKind, WeightedKernel};
use crate::piecewise::{build_phi_from_zeros, build_rho, certify_nonnegative};
use crate::quadrature::{integrate_half_line, QuadResult};
use crate::rational::{self, Rational};
use crate::sequences::{is_weak_supermajorisation, power_sum_delta, pte_degree, PteDegree, SequencePair};
use crate::series::lattice_tail;
use crate::special::factorial;

pub const REPORT_SCHEMA: u32 = 1;
const MAX_X: f64 = 1e9;

/// `W_f(x) = prod f(x + a_k) / prod f(x + b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSpec {
    pub model: EntireModel,
    pub pair: SequencePair,
}

impl RatioSpec {
    pub fn new(model: EntireModel, pair: SequencePair) -> Self {
        RatioSpec { model, pair }
    }

    fn pte(&self) -> PteDegree {
        pte_degree(&self.pair)
    }

    fn c_max(&self) -> f64 {
        rational::to_f64(&self.pair.max_entry())
    }

    /// Zeros up to this bound are summed exactly; the rest go through the
    /// lattice tail engine.
    fn head_limit(&self, x: f64) -> Rational {
        let c = self.c_max();
        let lim = 64f64.max(8.0 * c).max(4.0 * (x + c)).ceil();
        rational::int(lim as i64)
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !(x <= MAX_X) {
        return Err(Error::InvalidInput(format!("x must lie in (0, {MAX_X:e}], got {x}")));
    }
    Ok(())
}

fn sign_of(power: i64) -> f64 {
    if power.rem_euclid(2) == 0 { 1.0 } else { -1.0 }
}

fn convergence_check(spec: &RatioSpec, order: u32) -> Result<()> {
    let p = spec.model.genus;
    match spec.pte() {
        PteDegree::Infinite => Ok(()),
        PteDegree::Finite(d) if order + d >= p => Ok(()),
        PteDegree::Finite(d) => Err(Error::Precondition(format!(
            "the zero series for derivative order {order} needs order + pte_degree >= genus ({order} + {d} < {p})"
        ))),
    }
}

/// `psi_j(y + a) - psi_j(y + b)` with `psi_0 = log` and
/// `psi_j(y) = (-1)^(j-1) (j-1)! y^-j`, formed without cancellation.
fn psi_diff(j: u32, y: f64, a: f64, b: f64) -> f64 {
    if j == 0 {
        return ((a - b) / (y + b)).ln_1p();
    }
    let (ya, yb) = (y + a, y + b);
    // yb^j - ya^j = (b - a) * sum_i yb^i ya^(j-1-i)
    let mut s = 0.0;
    for i in 0..j {
        s += yb.powi(i as i32) * ya.powi((j - 1 - i) as i32);
    }
    sign_of(j as i64 - 1) * factorial(j - 1) * (b - a) * s / (ya * yb).powi(j as i32)
}

/// `(-1)^(j-1+m) (j+m-1)!/m!` for `j >= 1`, `(-1)^(m+1)/m` for `j = 0`:
/// the coefficient of `Delta_m y^-(j+m)` in `d_j(y)`.
fn tail_coefficient(j: u32, m: u32) -> f64 {
    if j == 0 {
        sign_of(m as i64 + 1) / m as f64
    } else {
        let mut r = 1.0;
        for i in (m + 1)..(j + m) {
            r *= i as f64;
        }
        sign_of((j + m - 1) as i64) * r
    }
}

/// `Delta_m` for `m < count`, flagged when exactly zero. The low orders that
/// decide convergence are exact; higher ones are power sums in floats.
fn deltas(pair: &SequencePair, count: u32) -> Vec<(bool, f64)> {
    let exact = (2 * pair.len() as u32 + 2).min(count);
    let (a, b) = (pair.a_f64(), pair.b_f64());
    (0..count)
        .map(|m| {
            if m < exact {
                let d = power_sum_delta(pair, m);
                (d.is_zero(), rational::to_f64(&d))
            } else {
                let s: f64 = a.iter().zip(&b).map(|(x, y)| x.powi(m as i32) - y.powi(m as i32)).sum();
                (false, s)
            }
        })
        .collect()
}

const TAIL_TERMS: u32 = 120;

/// `sum_m coef(m) Delta_m * sum_{zeros beyond the head} mult (x+lambda)^-(base+m)`.
fn zero_tail<F: Fn(u32) -> f64>(spec: &RatioSpec, head: &Rational, x: f64, base: u32, coef: F) -> Result<f64> {
    let zs = &spec.model.zeros;
    let Some(lp) = zs.lattice_f64() else { return Ok(0.0) };
    let k0 = zs.lattice_index_after(head).expect("lattice");
    let ds = deltas(&spec.pair, TAIL_TERMS);
    let y0 = x + rational::to_f64(head);
    let c = spec.c_max();
    let mut total = 0.0;
    for (m, &(zero, dm)) in ds.iter().enumerate().skip(1) {
        let m = m as u32;
        if zero {
            continue;
        }
        let t = lattice_tail(&lp.mult, lp.shift, lp.exponent, k0, x, (base + m) as f64)?;
        let term = coef(m) * dm * t;
        total += term;
        // remaining terms shrink at least like (c / y0)^m
        if (c / y0).powi(m as i32) * coef(m).abs().max(1.0) * 1e-2 < 1e-18 && term.abs() <= 1e-18 * total.abs() {
            break;
        }
    }
    Ok(total)
}

fn head_zeros(zeros: &ZeroStream, head: &Rational) -> Result<Vec<(f64, f64)>> {
    if let Some(limit) = zeros.known_limit() {
        return Err(Error::InsufficientZeros {
            known: rational::format_rational(&limit),
            needed: "infinity".into(),
        });
    }
    Ok(zeros
        .zeros_up_to(head)?
        .iter()
        .map(|(l, m)| (rational::to_f64(l), rational::to_f64(m)))
        .collect())
}

/// `d^order/dx^order log W_f(x)` from the zero series: exact pairwise
/// differences for zeros up to a cutoff, the asymptotic expansion in
/// `1/(x + lambda)` summed with Hurwitz zeta values beyond it.
pub fn dlogw_direct(spec: &RatioSpec, order: u32, x: f64, tol: f64) -> Result<f64> {
    check_x(x)?;
    convergence_check(spec, order)?;
    if spec.pair.is_identical() {
        return Ok(0.0);
    }
    let head = spec.head_limit(x);
    let zeros = head_zeros(&spec.model.zeros, &head)?;
    let (a, b) = (spec.pair.a_f64(), spec.pair.b_f64());
    let mut total = 0.0;
    for (lambda, mult) in &zeros {
        let y = x + lambda;
        let d: f64 = a.iter().zip(&b).map(|(ai, bi)| psi_diff(order, y, *ai, *bi)).sum();
        total += mult * d;
    }
    let tail = zero_tail(spec, &head, x, order, |m| tail_coefficient(order, m))?;
    let value = total + tail;
    if !value.is_finite() {
        return Err(Error::Divergent(format!("zero series overflowed at x = {x} (tol {tol:e})")));
    }
    Ok(value)
}

/// The same derivative from the model's closed-form oracle, when it has one.
pub fn dlogw_oracle(spec: &RatioSpec, order: u32, x: f64) -> Result<Option<f64>> {
    check_x(x)?;
    convergence_check(spec, order)?;
    if spec.model.oracle.is_none() {
        return Ok(None);
    }
    if spec.pair.is_identical() {
        return Ok(Some(0.0));
    }
    let mut s = 0.0;
    for (ai, bi) in spec.pair.a_f64().iter().zip(spec.pair.b_f64()) {
        let fa = spec.model.oracle_log_derivative(order, x + ai)?.unwrap();
        let fb = spec.model.oracle_log_derivative(order, x + bi)?.unwrap();
        s += fa - fb;
    }
    Ok(Some(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityId {
    /// Order `p+2` representation with `g`.
    Thm1,
    /// Order `p+1` representation, needs `sum a = sum b`.
    Thm2,
    /// Order `p+1` representation with `g_ell`.
    Thm3(u32),
    /// Barnes multiple gamma `1/Gamma_N`.
    CorBarnes(u32),
    /// Merged-shift variant of order `p-ell+2`.
    Prop25(u32),
    /// Asymptotic expansion of `d^(p-ell) log W`.
    Lemma24(u32),
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityId::Thm1 => write!(f, "thm1"),
            IdentityId::Thm2 => write!(f, "thm2"),
            IdentityId::Thm3(l) => write!(f, "thm3({l})"),
            IdentityId::CorBarnes(n) => write!(f, "cor_barnes({n})"),
            IdentityId::Prop25(l) => write!(f, "prop25({l})"),
            IdentityId::Lemma24(l) => write!(f, "lemma24({l})"),
        }
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    /// `thm1`, `thm2`, `thm3(2)` or `thm3:2`, `cor_barnes(2)`, ...
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.find(['(', ':']) {
            Some(i) => {
                let rest = &s[i + 1..];
                let rest = if s.as_bytes()[i] == b'(' {
                    rest.strip_suffix(')').ok_or_else(|| Error::Parse(format!("missing ')' in '{s}'")))?
                } else {
                    rest
                };
                let v: u32 = rest.trim().parse().map_err(|_| Error::Parse(format!("bad argument in '{s}'")))?;
                (&s[..i], Some(v))
            }
            None => (s, None),
        };
        let need = |v: Option<u32>| v.ok_or_else(|| Error::Parse(format!("'{head}' needs an argument, e.g. {head}(2)")));
        let none = |v: Option<u32>, id| match v {
            None => Ok(id),
            Some(_) => Err(Error::Parse(format!("'{head}' takes no argument"))),
        };
        match head {
            "thm1" => none(arg, IdentityId::Thm1),
            "thm2" => none(arg, IdentityId::Thm2),
            "thm3" => Ok(IdentityId::Thm3(need(arg)?)),
            "cor_barnes" | "barnes" => Ok(IdentityId::CorBarnes(need(arg)?)),
            "prop25" => Ok(IdentityId::Prop25(need(arg)?)),
            "lemma24" => Ok(IdentityId::Lemma24(need(arg)?)),
            _ => Err(Error::Parse(format!("unknown identity '{head}'"))),
        }
    }
}

/// What an identity compares: `V = sign * d^order log W`, the Laplace
/// weight `s^q`, the kernel `g_{g_ell}`, and the density `phi_{rho_ell}`
/// integrated against `(x+t)^-(q+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityPlan {
    pub order: u32,
    pub sign: f64,
    pub q: u32,
    pub g_ell: u32,
    pub rho_ell: u32,
    /// `q! / rho_ell!`, from integrating the Laplace form term by term.
    pub proof_constant: f64,
    /// The constant as printed in the theorem statement.
    pub display_constant: f64,
    pub notes: Vec<String>,
}

impl IdentityPlan {
    pub fn sigma(&self) -> u32 {
        self.q + 1
    }
}

fn plan_thm2(p: u32) -> Result<IdentityPlan> {
    if p == 0 {
        return Err(Error::Precondition("needs genus p >= 1".into()));
    }
    Ok(IdentityPlan {
        order: p - 1,
        sign: sign_of(p as i64),
        q: p,
        g_ell: 1,
        rho_ell: 1,
        proof_constant: factorial(p),
        display_constant: factorial(p),
        notes: Vec::new(),
    })
}

/// Resolves the derivative order, sign and constants of an identity.
pub fn plan_for(spec: &RatioSpec, id: IdentityId) -> Result<IdentityPlan> {
    let p = spec.model.genus;
    let pte = spec.pte();
    let need_pte = |ell: u32| -> Result<()> {
        if pte.at_least(ell) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("needs Delta_j = 0 for j <= {ell}, but pte_degree is {pte}")))
        }
    };
    match id {
        IdentityId::Thm1 => Ok(IdentityPlan {
            order: p,
            sign: sign_of(p as i64 - 1),
            q: p + 1,
            g_ell: 1,
            rho_ell: 1,
            proof_constant: factorial(p + 1),
            display_constant: factorial(p + 1),
            notes: Vec::new(),
        }),
        IdentityId::Thm2 => {
            need_pte(1)?;
            plan_thm2(p)
        }
        IdentityId::CorBarnes(n) => {
            if n != p {
                return Err(Error::Precondition(format!("cor_barnes({n}) needs a genus-{n} model, got genus {p}")));
            }
            need_pte(1)?;
            let mut plan = plan_thm2(p)?;
            plan.notes.push(format!(
                "sign (-1)^N = {} applied to d^(N-1) log W; the opposite sign (-1)^(N-1) does not match the Laplace side",
                plan.sign
            ));
            Ok(plan)
        }
        IdentityId::Thm3(ell) => {
            if ell == 0 || ell > p {
                return Err(Error::Precondition(format!("thm3 needs 1 <= ell <= p, got ell = {ell}, p = {p}")));
            }
            need_pte(ell)?;
            Ok(IdentityPlan {
                order: p - ell,
                sign: sign_of((p - ell + 1) as i64),
                q: p,
                g_ell: ell,
                rho_ell: ell,
                proof_constant: factorial(p) / factorial(ell),
                display_constant: factorial(p + 1),
                notes: Vec::new(),
            })
        }
        IdentityId::Prop25(ell) => {
            if p == 0 {
                return Err(Error::Precondition("prop25 needs genus p >= 1".into()));
            }
            let eff = ell.min(p);
            need_pte(eff)?;
            let mut notes = Vec::new();
            if eff != ell {
                notes.push(format!("ell = {ell} exceeds p = {p}; using ell = {eff}"));
            }
            let q = p - eff + 1;
            Ok(IdentityPlan {
                order: p - eff,
                sign: sign_of((p - eff + 1) as i64),
                q,
                g_ell: 1,
                rho_ell: 1,
                proof_constant: factorial(q),
                display_constant: factorial(q),
                notes,
            })
        }
        IdentityId::Lemma24(ell) => {
            if ell == 0 || ell > p {
                return Err(Error::Precondition(format!("lemma24 needs 1 <= ell <= p, got ell = {ell}, p = {p}")));
            }
            need_pte(ell)?;
            Ok(IdentityPlan {
                order: p - ell,
                sign: 1.0,
                q: 0,
                g_ell: ell,
                rho_ell: ell,
                proof_constant: 1.0,
                display_constant: 1.0,
                notes: Vec::new(),
            })
        }
    }
}

/// `int_0^inf e^{-sx} s^q h(s) g_ell(s) ds`.
pub fn laplace_integral(spec: &RatioSpec, ell: u32, q: u32, x: f64, tol: f64) -> Result<QuadResult> {
    check_x(x)?;
    if spec.pair.is_identical() {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let g = GKernel::new(&spec.pair, ell)?;
    let h = WeightedKernel::for_stream(&spec.model.zeros, KernelKind::H, 1e-15)?;
    integrate_half_line(|s| Ok((-s * x).exp() * h.eval(s, q as i32)? * g.eval(s)?), tol)
}

/// The Laplace side of an identity at `x`.
pub fn laplace_side(spec: &RatioSpec, id: IdentityId, x: f64, tol: f64) -> Result<QuadResult> {
    let plan = plan_for(spec, id)?;
    if matches!(id, IdentityId::Lemma24(_)) {
        return Err(Error::Precondition("lemma24 has no Laplace side".into()));
    }
    laplace_integral(spec, plan.g_ell, plan.q, x, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StieltjesSide {
    /// `int_0^inf phi_ell(t) / (x+t)^sigma dt`, without the constant.
    pub raw: f64,
    /// Agreement between cutoffs `Lambda` and `2 Lambda`.
    pub converged: bool,
    pub cutoff: f64,
}

fn binom_neg(sigma: f64, j: u32) -> f64 {
    // binom(-sigma, j)
    let mut r = 1.0;
    for i in 0..j {
        r *= -(sigma + i as f64) / (i as f64 + 1.0);
    }
    r
}

fn stieltjes_at(spec: &RatioSpec, ell: u32, sigma: u32, x: f64, head: &Rational) -> Result<f64> {
    let zs = &spec.model.zeros;
    let head_list = zs.zeros_up_to(head)?;
    let phi = build_phi_from_zeros(&spec.pair, ell, &head_list)?;
    let mut value = phi.stieltjes(x, sigma, None)?;
    let Some(lp) = zs.lattice_f64() else { return Ok(value) };
    let k0 = zs.lattice_index_after(head).expect("lattice");

    // Beyond the cutoff each zero adds R(x + lambda) with
    // R(y) = int rho(u) (y+u)^-sigma du, split into the compact part (moment
    // expansion) and the eventually-polynomial part (Beta integrals).
    let rho = build_rho(&spec.pair, ell)?;
    let (u0, unbounded) = match rho.unbounded_part() {
        Some((start, poly)) => (start, Some(poly)),
        None => (spec.pair.max_entry(), None),
    };
    let u0f = rational::to_f64(&u0);
    let y0 = x + rational::to_f64(head);
    let s = sigma as f64;
    const MOMENTS: usize = 80;
    let mu = rho.moments(&u0, MOMENTS);
    for (j, m) in mu.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let coef = binom_neg(s, j as u32) * rational::to_f64(m);
        let t = lattice_tail(&lp.mult, lp.shift, lp.exponent, k0, x, s + j as f64)?;
        value += coef * t;
        if j > 2 && (coef.abs() * y0.powf(-s - j as f64)).abs() < 1e-20 * value.abs().max(1e-300) && (u0f / y0) < 0.5 {
            break;
        }
    }
    if let Some(poly) = unbounded {
        for (r, c) in poly.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if sigma < r as u32 + 2 {
                return Err(Error::Divergent(format!("density grows like t^{r} against (x+t)^-{sigma}")));
            }
            let beta = factorial(r as u32) * factorial(sigma - r as u32 - 2) / factorial(sigma - 1);
            let t = lattice_tail(&lp.mult, lp.shift, lp.exponent, k0, x + u0f, s - r as f64 - 1.0)?;
            value += rational::to_f64(c) * beta * t;
        }
    }
    Ok(value)
}

/// `int_0^inf phi_ell(t)/(x+t)^sigma dt` over the full zero stream.
pub fn stieltjes_integral_full(spec: &RatioSpec, ell: u32, sigma: u32, x: f64) -> Result<StieltjesSide> {
    check_x(x)?;
    if spec.pair.is_identical() {
        return Ok(StieltjesSide { raw: 0.0, converged: true, cutoff: 0.0 });
    }
    if let Some(limit) = spec.model.zeros.known_limit() {
        return Err(Error::InsufficientZeros { known: rational::format_rational(&limit), needed: "infinity".into() });
    }
    let head = spec.head_limit(x);
    let v1 = stieltjes_at(spec, ell, sigma, x, &head)?;
    if !spec.model.zeros.is_lattice() {
        return Ok(StieltjesSide { raw: v1, converged: true, cutoff: f64::INFINITY });
    }
    let head2 = &head * rational::int(2);
    let v2 = stieltjes_at(spec, ell, sigma, x, &head2)?;
    let converged = (v1 - v2).abs() <= 1e-9 * v2.abs().max(1e-300) || v1 == v2;
    Ok(StieltjesSide { raw: v2, converged, cutoff: rational::to_f64(&head2) })
}

/// The Stieltjes side of an identity without its constant.
pub fn stieltjes_side(spec: &RatioSpec, id: IdentityId, x: f64) -> Result<StieltjesSide> {
    let plan = plan_for(spec, id)?;
    if matches!(id, IdentityId::Lemma24(_)) {
        return Err(Error::Precondition("lemma24 has no Stieltjes side".into()));
    }
    stieltjes_integral_full(spec, plan.rho_ell, plan.sigma(), x)
}

/// `C_{m,ell}`: `binom(ell-p, m)` for `ell < p`, `(-1)^(m+1)/m` for `ell = p`.
fn lemma24_c(p: u32, ell: u32, m: u32) -> f64 {
    if ell == p {
        sign_of(m as i64 + 1) / m as f64
    } else {
        binom_neg((p - ell) as f64, m)
    }
}

fn lemma24_prefactor(p: u32, ell: u32) -> f64 {
    if ell == p {
        1.0
    } else {
        sign_of((p - ell - 1) as i64) * factorial(p - ell - 1)
    }
}

fn require_lemma24(spec: &RatioSpec, ell: u32, x: f64) -> Result<()> {
    plan_for(spec, IdentityId::Lemma24(ell))?;
    let c = spec.c_max();
    if x < 2.0 * c {
        return Err(Error::Precondition(format!("expansion needs x >= 2 max(a, b) = {}", 2.0 * c)));
    }
    Ok(())
}

/// The right-hand side of the expansion
/// `d^(p-ell) log W = P sum_k (x+lambda_k)^-(p+1) sum_{m>ell} Delta_m C_{m,ell} (x+lambda_k)^-(m-ell-1)`,
/// where `P = (-1)^(p-ell-1) (p-ell-1)!` for `ell < p` and 1 for `ell = p`.
pub fn lemma24_expansion(spec: &RatioSpec, ell: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    require_lemma24(spec, ell, x)?;
    let p = spec.model.genus;
    if spec.pair.is_identical() {
        return Ok(0.0);
    }
    let ds = deltas(&spec.pair, TAIL_TERMS);
    let head = spec.head_limit(x);
    let zeros = head_zeros(&spec.model.zeros, &head)?;
    let mut total = 0.0;
    for (lambda, mult) in &zeros {
        let y = x + lambda;
        total += mult * y.powi(-(p as i32) - 1) * lemma24_inner(&ds, p, ell, y);
    }
    let pre = lemma24_prefactor(p, ell);
    let tail = zero_tail(spec, &head, x, p - ell, |m| lemma24_c(p, ell, m))?;
    Ok(pre * total + pre * tail)
}

fn lemma24_inner(ds: &[(bool, f64)], p: u32, ell: u32, y: f64) -> f64 {
    let mut inner = 0.0;
    for m in (ell + 1)..ds.len() as u32 {
        let (zero, dm) = ds[m as usize];
        if zero {
            continue;
        }
        inner += dm * lemma24_c(p, ell, m) * y.powi(-((m - ell - 1) as i32));
    }
    inner
}

/// The inner sums for the first `count` zeros and the uniform bound
/// `2 n c^(ell+1) sum_{m>ell} |C_{m,ell}| 2^-(m-ell-1)`.
pub fn lemma24_inner_sums(spec: &RatioSpec, ell: u32, x: f64, count: usize) -> Result<(Vec<f64>, f64)> {
    check_x(x)?;
    require_lemma24(spec, ell, x)?;
    let p = spec.model.genus;
    let ds = deltas(&spec.pair, TAIL_TERMS);
    let inner = spec
        .model
        .zeros
        .first_zeros(count)
        .iter()
        .map(|(l, _)| lemma24_inner(&ds, p, ell, x + rational::to_f64(l)))
        .collect();
    let c = spec.c_max();
    let n = spec.pair.len() as f64;
    let series: f64 = ((ell + 1)..(ell + 400)).map(|m| lemma24_c(p, ell, m).abs() * 0.5f64.powi((m - ell - 1) as i32)).sum();
    Ok((inner, 2.0 * n * c.powi(ell as i32 + 1) * series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub name: String,
    pub holds: bool,
    /// Required for the identity to be evaluated at all (as opposed to a
    /// positivity hypothesis).
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub x: f64,
    pub direct: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplace_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stieltjes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stieltjes_converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<f64>,
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub identity: String,
    pub model: String,
    pub genus: u32,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub pte_degree: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,
    pub tolerance: f64,
    pub applicable: bool,
    pub preconditions: Vec<Precondition>,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_constant: Option<f64>,
    /// `direct / raw Stieltjes integral`, when constant across the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_constant: Option<f64>,
    /// Which constant the resolved value matches: proof, display, both, neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_match: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_nonnegative: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_on_grid: Option<bool>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: VerificationReport = serde_json::from_str(text).map_err(|e| Error::Parse(format!("report JSON: {e}")))?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Parse(format!("unsupported report schema {}", r.schema)));
        }
        Ok(r)
    }
}

fn deviation(reference: f64, other: f64) -> (f64, f64) {
    let abs = (other - reference).abs();
    let rel = if abs == 0.0 { 0.0 } else { abs / reference.abs().max(f64::MIN_POSITIVE) };
    (abs, rel)
}

fn constant_label(value: f64, proof: f64, display: f64) -> String {
    let close = |c: f64| (value - c).abs() <= 1e-6 * c.abs();
    match (close(proof), close(display)) {
        (true, true) => "both",
        (true, false) => "proof",
        (false, true) => "display",
        (false, false) => "neither",
    }
    .to_string()
}

/// Depth of the merged-shift check used as the prop25 hypothesis.
pub const MERGED_SHIFT_DEPTH: usize = 400;

/// Evaluates all available sides of an identity on the grid.
pub fn verify_identity(spec: &RatioSpec, id: IdentityId, grid: &[f64], tol: f64) -> Result<VerificationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    for &x in grid {
        check_x(x)?;
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let pte = spec.pte();
    let mut report = VerificationReport {
        schema: REPORT_SCHEMA,
        identity: id.to_string(),
        model: spec.model.name.clone(),
        genus: spec.model.genus,
        a: spec.pair.a().iter().map(rational::format_rational).collect(),
        b: spec.pair.b().iter().map(rational::format_rational).collect(),
        pte_degree: pte.to_string(),
        derivative_order: None,
        sign: None,
        tolerance: tol,
        applicable: false,
        preconditions: Vec::new(),
        rows: Vec::new(),
        proof_constant: None,
        display_constant: None,
        resolved_constant: None,
        constant_match: None,
        density_nonnegative: None,
        positive_on_grid: None,
        pass: false,
        notes: Vec::new(),
    };
    let plan = match plan_for(spec, id) {
        Ok(p) => p,
        Err(Error::Precondition(msg)) => {
            report.preconditions.push(Precondition { name: "identity applies".into(), holds: false, required: true, detail: Some(msg) });
            report.notes.push("not applicable".into());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.derivative_order = Some(plan.order);
    report.sign = Some(plan.sign as i32);
    report.notes.extend(plan.notes.iter().cloned());
    let conv = convergence_check(spec, plan.order);
    report.preconditions.push(Precondition {
        name: "zero series converges".into(),
        holds: conv.is_ok(),
        required: true,
        detail: conv.err().map(|e| e.to_string()),
    });

    // positivity hypotheses
    let mut hypotheses = true;
    match id {
        IdentityId::Thm1 | IdentityId::Thm2 | IdentityId::CorBarnes(_) => {
            let holds = is_weak_supermajorisation(&spec.pair);
            hypotheses = holds;
            report.preconditions.push(Precondition { name: "b weakly supermajorised by a".into(), holds, required: false, detail: None });
        }
        IdentityId::Thm3(ell) => {
            let cert = certify_nonnegative(&build_rho(&spec.pair, ell)?);
            hypotheses = cert.nonnegative;
            report.preconditions.push(Precondition {
                name: format!("rho_{ell} non-negative"),
                holds: cert.nonnegative,
                required: false,
                detail: cert.witness_text.map(|t| format!("negative at t = {t}")),
            });
        }
        IdentityId::Prop25(_) => {
            let r = merged_shift_supermajorisation(&spec.pair, &spec.model, MERGED_SHIFT_DEPTH)?;
            hypotheses = r.verdict == Verdict::Pass;
            report.preconditions.push(Precondition {
                name: "merged shifted zeros weakly supermajorised".into(),
                holds: hypotheses,
                required: false,
                detail: Some(format!("{:?} over {} terms", r.verdict, r.examined).to_lowercase()),
            });
        }
        IdentityId::Lemma24(_) => {
            let c2 = 2.0 * spec.c_max();
            let holds = grid.iter().all(|&x| x >= c2);
            report.preconditions.push(Precondition {
                name: "x >= 2 max(a, b) on the grid".into(),
                holds,
                required: true,
                detail: Some(format!("2 max(a, b) = {c2}")),
            });
        }
    }
    if report.preconditions.iter().any(|p| p.required && !p.holds) {
        report.notes.push("not applicable".into());
        return Ok(report);
    }
    report.applicable = true;

    let is_lemma = matches!(id, IdentityId::Lemma24(_));
    if !is_lemma {
        report.proof_constant = Some(plan.proof_constant);
        report.display_constant = Some(plan.display_constant);
    }
    let quad_tol = (tol * 0.05).max(1e-13);
    let mut ratios = Vec::new();
    for &x in grid {
        let direct = plan.sign * dlogw_direct(spec, plan.order, x, tol)?;
        let oracle = dlogw_oracle(spec, plan.order, x)?.map(|v| plan.sign * v);
        let mut row = ReportRow {
            x,
            direct,
            oracle,
            laplace: None,
            laplace_error: None,
            stieltjes: None,
            stieltjes_converged: None,
            expansion: None,
            max_abs_dev: 0.0,
            max_rel_dev: 0.0,
            pass: true,
        };
        if is_lemma {
            row.expansion = Some(lemma24_expansion(spec, plan.rho_ell, x)?);
        } else {
            let lap = laplace_integral(spec, plan.g_ell, plan.q, x, quad_tol)?;
            row.laplace = Some(lap.value);
            row.laplace_error = Some(lap.error);
            let st = stieltjes_integral_full(spec, plan.rho_ell, plan.sigma(), x)?;
            row.stieltjes = Some(plan.proof_constant * st.raw);
            row.stieltjes_converged = Some(st.converged);
            if !st.converged {
                row.pass = false;
            }
            if st.raw != 0.0 {
                ratios.push(direct / st.raw);
            }
        }
        for v in [row.oracle, row.laplace, row.stieltjes, row.expansion].into_iter().flatten() {
            let (abs, rel) = deviation(direct, v);
            row.max_abs_dev = row.max_abs_dev.max(abs);
            row.max_rel_dev = row.max_rel_dev.max(rel);
        }
        if row.max_rel_dev > tol {
            row.pass = false;
        }
        report.rows.push(row);
    }

    if !ratios.is_empty() && ratios.len() == grid.len() {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
        if spread <= 1e-6 * mean.abs() {
            report.resolved_constant = Some(mean);
            report.constant_match = Some(constant_label(mean, plan.proof_constant, plan.display_constant));
        } else {
            report.notes.push(format!("direct/Stieltjes ratio varies across the grid (spread {spread:e})"));
        }
    }
    if matches!(id, IdentityId::Prop25(_)) {
        // phi is exact on [0, Lambda]; certify it there
        let head = spec.head_limit(grid.iter().cloned().fold(0.0, f64::max));
        if spec.model.zeros.known_limit().is_none() {
            let zs = spec.model.zeros.zeros_up_to(&head)?;
            let phi = build_phi_from_zeros(&spec.pair, plan.rho_ell, &zs)?.truncated(&head);
            let ok = certify_nonnegative(&phi).nonnegative;
            report.density_nonnegative = Some(ok);
            report.notes.push(format!("phi checked exactly on [0, {}]", rational::format_rational(&head)));
        }
    }
    if hypotheses && !spec.pair.is_identical() {
        report.positive_on_grid = Some(report.rows.iter().all(|r| r.direct > 0.0));
    }
    report.pass = report.rows.iter().all(|r| r.pass);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmViolation {
    pub x: f64,
    pub order: u32,
    /// `(-1)^order * forward difference`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub pass: bool,
    pub max_order: u32,
    pub points: usize,
    pub scale: f64,
    pub first_violation: Option<CmViolation>,
}

/// Checks `(-1)^k Delta_step^k f(x) >= -tol * scale` for `k <= max_order` at
/// every grid point, `scale` being the largest `|f|` on the stencils.
pub fn cm_test<F: FnMut(f64) -> Result<f64>>(mut f: F, max_order: u32, grid: &[f64], step: f64, tol: f64) -> Result<CmReport> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let mut stencils = Vec::with_capacity(grid.len());
    let mut scale: f64 = 0.0;
    for &x in grid {
        let vals = (0..=max_order).map(|i| f(x + i as f64 * step)).collect::<Result<Vec<f64>>>()?;
        scale = vals.iter().fold(scale, |s, v| s.max(v.abs()));
        stencils.push((x, vals));
    }
    let mut first_violation = None;
    'outer: for (x, vals) in &stencils {
        let mut diff = vals.clone();
        for k in 1..=max_order {
            for i in 0..diff.len() - 1 {
                diff[i] = diff[i + 1] - diff[i];
            }
            diff.pop();
            let v = sign_of(k as i64) * diff[0];
            if v < -tol * scale {
                first_violation = Some(CmViolation { x: *x, order: k, value: v });
                break 'outer;
            }
        }
        if vals[0] < -tol * scale {
            first_violation = Some(CmViolation { x: *x, order: 0, value: vals[0] });
            break;
        }
    }
    Ok(CmReport { pass: first_violation.is_none(), max_order, points: grid.len(), scale, first_violation })
}
