use gstieltjes::catalog::{make_model, ModelKind};
use gstieltjes::kernels::laplace_rho_identity;
use gstieltjes::piecewise::{build_rho, certify_nonnegative};
use gstieltjes::rational::{format_rational, parse_rational, Rational};
use gstieltjes::representations::{dlogw_direct, RatioSpec};
use gstieltjes::sequences::{is_weak_supermajorisation, power_sum_delta, pte_degree, SequencePair};
use gstieltjes::special::{ln_gamma, polygamma};
use num_bigint::BigInt;
use proptest::prelude::*;

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..500).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn arb_pair(max: i64) -> impl Strategy<Value = SequencePair> {
    (1usize..5).prop_flat_map(move |n| {
        (prop::collection::vec(0..=max, n), prop::collection::vec(0..=max, n))
            .prop_map(|(a, b)| SequencePair::from_i64(&a, &b).unwrap())
    })
}

fn shifted(p: &SequencePair, c: i64) -> SequencePair {
    let s = |v: &[Rational]| v.iter().map(|x| x + Rational::from_integer(BigInt::from(c))).collect();
    SequencePair::new(s(p.a()), s(p.b())).unwrap()
}

proptest! {
    #[test]
    fn rational_text_round_trip(q in arb_rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }

    #[test]
    fn pte_degree_is_symmetric_and_shift_invariant(p in arb_pair(8), c in 0i64..6) {
        prop_assert_eq!(pte_degree(&p), pte_degree(&p.swapped()));
        prop_assert_eq!(pte_degree(&p), pte_degree(&shifted(&p, c)));
    }

    #[test]
    fn majorised_pair_with_two_equal_power_sums_is_trivial(p in arb_pair(6)) {
        let zero = Rational::from_integer(BigInt::from(0));
        if is_weak_supermajorisation(&p) && power_sum_delta(&p, 1) == zero && power_sum_delta(&p, 2) == zero {
            prop_assert!(p.is_identical());
        }
    }

    #[test]
    fn majorisation_matches_rho1_sign(p in arb_pair(8)) {
        let rho = build_rho(&p, 1).unwrap();
        prop_assert_eq!(certify_nonnegative(&rho).nonnegative, is_weak_supermajorisation(&p));
    }

    #[test]
    fn laplace_of_rho_is_the_kernel(p in arb_pair(6), ell in 1u32..4, s in 0.2f64..4.0) {
        let (g, l, d) = laplace_rho_identity(&p, ell, s).unwrap();
        prop_assert!(d <= 1e-10 * g.abs().max(l.abs()).max(1.0), "g = {g}, L = {l}");
    }

    #[test]
    fn gamma_ratio_matches_log_gamma(p in arb_pair(6), x in 0.5f64..20.0) {
        let model = make_model(&ModelKind::ReciprocalGamma).unwrap();
        let spec = RatioSpec::new(model, p.clone());
        // f = 1/Gamma: log W = sum log Gamma(x + b) - log Gamma(x + a)
        let d1 = dlogw_direct(&spec, 1, x, 1e-13).unwrap();
        let oracle: f64 = p.b_f64().iter().map(|b| polygamma(0, x + b).unwrap()).sum::<f64>()
            - p.a_f64().iter().map(|a| polygamma(0, x + a).unwrap()).sum::<f64>();
        prop_assert!((d1 - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{d1} vs {oracle}");
        if pte_degree(&p).at_least(1) {
            let d0 = dlogw_direct(&spec, 0, x, 1e-13).unwrap();
            let oracle: f64 = p.b_f64().iter().map(|b| ln_gamma(x + b).unwrap()).sum::<f64>()
                - p.a_f64().iter().map(|a| ln_gamma(x + a).unwrap()).sum::<f64>();
            prop_assert!((d0 - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{d0} vs {oracle}");
        }
    }

    #[test]
    fn swapping_the_pair_negates_log_w(p in arb_pair(6), x in 0.5f64..20.0) {
        let model = make_model(&ModelKind::BarnesG).unwrap();
        let fwd = dlogw_direct(&RatioSpec::new(model.clone(), p.clone()), 2, x, 1e-13).unwrap();
        let back = dlogw_direct(&RatioSpec::new(model, p.swapped()), 2, x, 1e-13).unwrap();
        prop_assert!((fwd + back).abs() <= 1e-12 * fwd.abs().max(1e-3));
    }
}
