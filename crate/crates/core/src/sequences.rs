//! Finite sequence pairs `(a, b)`, their power sums, weak supermajorisation
//! and Prouhet–Tarry–Escott (PTE) degree and search.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Two sorted tuples of non-negative rationals of equal length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequencePair {
    a: Vec<Rational>,
    b: Vec<Rational>,
}

impl SequencePair {
    /// Sorts both tuples; rejects empty, unequal-length or negative input.
    pub fn new(mut a: Vec<Rational>, mut b: Vec<Rational>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidInput("sequences must be non-empty".into()));
        }
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "sequences have different lengths ({} and {})",
                a.len(),
                b.len()
            )));
        }
        if let Some(v) = a.iter().chain(b.iter()).find(|v| v.is_negative()) {
            return Err(Error::InvalidInput(format!(
                "entries must be non-negative, got {}",
                rational::format_rational(v)
            )));
        }
        a.sort();
        b.sort();
        Ok(Self { a, b })
    }

    pub fn from_i64(a: &[i64], b: &[i64]) -> Result<Self> {
        Self::new(
            a.iter().map(|&v| rational::int(v)).collect(),
            b.iter().map(|&v| rational::int(v)).collect(),
        )
    }

    /// Parses two comma-separated rational lists.
    pub fn parse(a: &str, b: &str) -> Result<Self> {
        Self::new(rational::parse_rational_list(a)?, rational::parse_rational_list(b)?)
    }

    pub fn a(&self) -> &[Rational] {
        &self.a
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `c_n = max(a_n, b_n)`.
    pub fn max_entry(&self) -> Rational {
        let (x, y) = (self.a.last().unwrap(), self.b.last().unwrap());
        if x > y { x.clone() } else { y.clone() }
    }

    pub fn min_entry(&self) -> Rational {
        let (x, y) = (&self.a[0], &self.b[0]);
        if x < y { x.clone() } else { y.clone() }
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b.clone(), b: self.a.clone() }
    }

    pub fn is_identical(&self) -> bool {
        self.a == self.b
    }

    pub fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(rational::to_f64).collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(rational::to_f64).collect()
    }
}

impl fmt::Display for SequencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Rational]| v.iter().map(rational::format_rational).collect::<Vec<_>>().join(",");
        write!(f, "(({}),({}))", show(&self.a), show(&self.b))
    }
}

impl Serialize for SequencePair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let show = |v: &[Rational]| v.iter().map(rational::format_rational).collect::<Vec<_>>();
        let mut st = s.serialize_struct("SequencePair", 2)?;
        st.serialize_field("a", &show(&self.a))?;
        st.serialize_field("b", &show(&self.b))?;
        st.end()
    }
}

/// `Delta_m = sum a_k^m - sum b_k^m`, exactly.
pub fn power_sum_delta(pair: &SequencePair, m: u32) -> Rational {
    let sum = |v: &[Rational]| v.iter().fold(Rational::zero(), |acc, x| acc + rational::pow(x, m));
    sum(&pair.a) - sum(&pair.b)
}

/// `Delta_0 ..= Delta_max` as floats.
pub fn power_sum_deltas_f64(pair: &SequencePair, max: u32) -> Vec<f64> {
    (0..=max).map(|m| rational::to_f64(&power_sum_delta(pair, m))).collect()
}

/// Tests `b ≺_w a`: every partial sum of `a` is at most the matching partial
/// sum of `b`.
pub fn is_weak_supermajorisation(pair: &SequencePair) -> bool {
    let mut sa = Rational::zero();
    let mut sb = Rational::zero();
    for (x, y) in pair.a.iter().zip(&pair.b) {
        sa += x;
        sb += y;
        if sa > sb {
            return false;
        }
    }
    true
}

/// Largest `l` with `Delta_j = 0` for all `j <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PteDegree {
    Finite(u32),
    /// `a == b`: every power sum agrees.
    Infinite,
}

impl PteDegree {
    pub fn at_least(self, ell: u32) -> bool {
        match self {
            PteDegree::Finite(d) => d >= ell,
            PteDegree::Infinite => true,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            PteDegree::Finite(d) => Some(d),
            PteDegree::Infinite => None,
        }
    }
}

impl fmt::Display for PteDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PteDegree::Finite(d) => write!(f, "{d}"),
            PteDegree::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for PteDegree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PteDegree::Finite(d) => s.serialize_u32(*d),
            PteDegree::Infinite => s.serialize_str("infinite"),
        }
    }
}

pub fn pte_degree(pair: &SequencePair) -> PteDegree {
    if pair.is_identical() {
        return PteDegree::Infinite;
    }
    // Newton's identities: equal power sums 1..=n force equal multisets, so
    // the loop ends by m = n.
    let mut m = 1;
    loop {
        if !power_sum_delta(pair, m).is_zero() {
            return PteDegree::Finite(m - 1);
        }
        m += 1;
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PteSearchOptions {
    /// Allow repeated entries within a tuple (multisets). Off by default,
    /// matching the classical formulation with distinct integers.
    pub allow_repeats: bool,
}

/// All canonical pairs with entries in `0..=max_value` and PTE degree at
/// least `ell`, sorted lexicographically by `(a, b)`.
pub fn pte_search(n: usize, max_value: u32, ell: u32) -> Result<Vec<SequencePair>> {
    pte_search_with(n, max_value, ell, PteSearchOptions::default())
}

pub fn pte_search_with(n: usize, max_value: u32, ell: u32, opts: PteSearchOptions) -> Result<Vec<SequencePair>> {
    if n == 0 || max_value == 0 || ell == 0 {
        return Err(Error::InvalidInput("pte_search needs n >= 1, max_value >= 1, ell >= 1".into()));
    }
    if n > 12 || max_value > 200 || ell > 32 {
        return Err(Error::InvalidInput("pte_search bounds too large (n <= 12, max_value <= 200, ell <= 32)".into()));
    }
    let pool = max_value as u64 + 1 + if opts.allow_repeats { n as u64 - 1 } else { 0 };
    if binomial_capped(pool, n as u64, MAX_SEARCH_TUPLES) > MAX_SEARCH_TUPLES {
        return Err(Error::InvalidInput(format!(
            "pte_search would enumerate more than {MAX_SEARCH_TUPLES} tuples"
        )));
    }
    let tuples = enumerate_tuples(n, max_value, opts.allow_repeats);
    let mut groups: HashMap<Vec<BigInt>, Vec<usize>> = HashMap::new();
    for (idx, t) in tuples.iter().enumerate() {
        groups.entry(power_signature(t, ell)).or_default().push(idx);
    }
    let mut out = Vec::new();
    for members in groups.values() {
        for &i in members {
            for &j in members {
                let (x, y) = (&tuples[i], &tuples[j]);
                if x[0] < y[0] {
                    let to_q = |v: &[u32]| v.iter().map(|&e| rational::int(e as i64)).collect();
                    out.push(SequencePair::new(to_q(x), to_q(y))?);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

const MAX_SEARCH_TUPLES: u64 = 5_000_000;

fn binomial_capped(n: u64, k: u64, cap: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return cap + 1;
        }
    }
    acc as u64
}

fn power_signature(t: &[u32], ell: u32) -> Vec<BigInt> {
    // Checked i128 first; BigInt only when that overflows.
    let mut sig = Vec::with_capacity(ell as usize);
    for m in 1..=ell {
        let fast = t.iter().try_fold(0i128, |acc, &v| {
            (v as i128).checked_pow(m).and_then(|p| acc.checked_add(p))
        });
        sig.push(match fast {
            Some(s) => BigInt::from(s),
            None => t.iter().map(|&v| num_traits::pow(BigInt::from(v), m as usize)).sum(),
        });
    }
    sig
}

fn enumerate_tuples(n: usize, max_value: u32, repeats: bool) -> Vec<Vec<u32>> {
    fn rec(n: usize, start: u32, max: u32, repeats: bool, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in start..=max {
            cur.push(v);
            rec(n, if repeats { v } else { v + 1 }, max, repeats, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, max_value, repeats, &mut Vec::with_capacity(n), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(a: &[i64], b: &[i64]) -> SequencePair {
        SequencePair::from_i64(a, b).unwrap()
    }

    #[test]
    fn construction_sorts_and_validates() {
        let p = pair(&[5, 0, 4], &[6, 1, 2]);
        assert_eq!(p.a(), &[rational::int(0), rational::int(4), rational::int(5)]);
        assert_eq!(p.b(), &[rational::int(1), rational::int(2), rational::int(6)]);
        assert!(SequencePair::from_i64(&[1], &[1, 2]).is_err());
        assert!(SequencePair::from_i64(&[], &[]).is_err());
        assert!(SequencePair::from_i64(&[-1], &[1]).is_err());
        assert!(SequencePair::parse("0,3/2,3/2", "1/2,1/2,2").is_ok());
        assert!(SequencePair::parse("0,x", "1,2").unwrap_err().is_parse());
    }

    #[test]
    fn power_sums() {
        let p = pair(&[0, 4, 5], &[1, 2, 6]);
        assert_eq!(power_sum_delta(&p, 0), rational::int(0));
        assert_eq!(power_sum_delta(&p, 1), rational::int(0));
        assert_eq!(power_sum_delta(&p, 2), rational::int(0));
        assert_eq!(power_sum_delta(&p, 3), rational::int(-36));
        let same = pair(&[2, 7], &[7, 2]);
        assert!((0..6).all(|m| power_sum_delta(&same, m).is_zero()));
    }

    #[test]
    fn weak_supermajorisation_examples() {
        assert!(is_weak_supermajorisation(&pair(&[0, 3], &[1, 2])));
        assert!(!is_weak_supermajorisation(&pair(&[0, 4, 5], &[1, 2, 6])));
        assert!(is_weak_supermajorisation(&pair(&[1, 1], &[1, 1])));
    }

    #[test]
    fn pte_degrees() {
        assert_eq!(pte_degree(&pair(&[0, 4, 5], &[1, 2, 6])), PteDegree::Finite(2));
        assert_eq!(pte_degree(&pair(&[0, 3], &[1, 2])), PteDegree::Finite(1));
        assert_eq!(pte_degree(&pair(&[0, 1], &[1, 1])), PteDegree::Finite(0));
        assert_eq!(pte_degree(&pair(&[3, 3], &[3, 3])), PteDegree::Infinite);
        let half = SequencePair::parse("0,3/2,3/2", "1/2,1/2,2").unwrap();
        assert_eq!(pte_degree(&half), PteDegree::Finite(2));
    }

    fn brute_force(n: usize, max: u32, ell: u32) -> Vec<SequencePair> {
        // Independent of the signature grouping: all ordered tuple pairs.
        let tuples = enumerate_tuples(n, max, false);
        let mut out = Vec::new();
        for x in &tuples {
            for y in &tuples {
                if x[0] < y[0] {
                    let p = SequencePair::new(
                        x.iter().map(|&v| rational::int(v as i64)).collect(),
                        y.iter().map(|&v| rational::int(v as i64)).collect(),
                    )
                    .unwrap();
                    if pte_degree(&p).at_least(ell) {
                        out.push(p);
                    }
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn search_examples() {
        let found = pte_search(3, 6, 2).unwrap();
        assert_eq!(found, vec![pair(&[0, 4, 5], &[1, 2, 6])]);
        assert_eq!(found, brute_force(3, 6, 2));
        assert!(pte_search(2, 3, 2).unwrap().is_empty());
        assert!(pte_search(1, 9, 1).unwrap().is_empty());
        assert_eq!(pte_search(3, 7, 2).unwrap(), brute_force(3, 7, 2));
        assert_eq!(pte_search(4, 9, 3).unwrap(), brute_force(4, 9, 3));
    }

    #[test]
    fn search_with_repeats_adds_multiset_solutions() {
        let found = pte_search_with(3, 6, 2, PteSearchOptions { allow_repeats: true }).unwrap();
        assert!(found.contains(&pair(&[0, 4, 5], &[1, 2, 6])));
        assert!(found.contains(&pair(&[0, 3, 3], &[1, 1, 4])));
        for p in &found {
            assert!(pte_degree(p).at_least(2));
            assert!(p.a()[0] < p.b()[0]);
        }
    }

    #[test]
    fn search_rejects_bad_bounds() {
        assert!(pte_search(0, 3, 1).is_err());
        assert!(pte_search(2, 0, 1).is_err());
        assert!(pte_search(2, 3, 0).is_err());
        assert!(pte_search(12, 200, 3).is_err());
    }

    fn small_tuple(n: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(0i64..8, n)
    }

    proptest! {
        #[test]
        fn delta_zero_vanishes(a in small_tuple(4), b in small_tuple(4)) {
            let p = pair(&a, &b);
            prop_assert!(power_sum_delta(&p, 0).is_zero());
        }

        #[test]
        fn majorised_with_equal_first_two_power_sums_are_equal(
            n in 1usize..6, seed in prop::collection::vec((0i64..7, 0i64..7), 6)
        ) {
            let a: Vec<i64> = seed.iter().take(n).map(|s| s.0).collect();
            let b: Vec<i64> = seed.iter().take(n).map(|s| s.1).collect();
            let p = pair(&a, &b);
            if is_weak_supermajorisation(&p)
                && power_sum_delta(&p, 1).is_zero()
                && power_sum_delta(&p, 2).is_zero()
            {
                prop_assert!(p.is_identical());
            }
        }

        #[test]
        fn pte_degree_is_symmetric(a in small_tuple(3), b in small_tuple(3)) {
            let p = pair(&a, &b);
            prop_assert_eq!(pte_degree(&p), pte_degree(&p.swapped()));
        }
    }
}
