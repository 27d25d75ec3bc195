//! Replays the checked-in fuzz seeds through the same entry points the fuzz targets use,
//! so the corpus stays exercised on stable toolchains.

use std::fs;
use std::path::PathBuf;

use gstieltjes::catalog::{make_model, parse_custom_model, parse_model_name, parse_mult_expr};
use gstieltjes::rational::{self, format_rational, parse_rational, parse_rational_list};
use gstieltjes::representations::{IdentityId, VerificationReport};
use gstieltjes::sequences::{is_weak_supermajorisation, pte_degree, SequencePair};
use gstieltjes::vertical::VerticalIdentity;

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn parse_rational_seeds() {
    let mut ok = 0;
    for s in seeds("parse_rational") {
        if let Ok(q) = parse_rational(&s) {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
            ok += 1;
        }
        let _ = parse_rational_list(&s);
    }
    assert!(ok >= 2);
}

#[test]
fn sequence_pair_seeds() {
    let mut ok = 0;
    for s in seeds("sequence_pair") {
        let Some((a, b)) = s.split_once('|') else { continue };
        if let Ok(pair) = SequencePair::parse(a, b) {
            let _ = pte_degree(&pair);
            let _ = is_weak_supermajorisation(&pair);
            ok += 1;
        }
    }
    assert!(ok >= 3);
}

#[test]
fn model_name_seeds() {
    for s in seeds("model_name") {
        if let Ok(kind) = parse_model_name(&s) {
            let _ = make_model(&kind);
        }
    }
}

#[test]
fn custom_model_seeds() {
    let mut ok = 0;
    for s in seeds("custom_model") {
        if let Ok(model) = parse_custom_model(&s) {
            let _ = model.zeros.first_zeros(8);
            let _ = model.zeros.zeros_up_to(&rational::int(16));
            ok += 1;
        }
    }
    assert!(ok >= 2);
}

#[test]
fn mult_expr_seeds() {
    let parsed = seeds("mult_expr").iter().filter(|s| parse_mult_expr(s).is_ok()).count();
    assert!(parsed >= 2);
}

#[test]
fn identity_name_seeds() {
    for s in seeds("identity_name") {
        if let Ok(id) = s.parse::<IdentityId>() {
            assert_eq!(id.to_string().parse::<IdentityId>().unwrap(), id);
        }
        let _ = s.parse::<VerticalIdentity>();
    }
}

#[test]
fn report_json_seeds() {
    let mut ok = 0;
    for s in seeds("report_json") {
        if let Ok(report) = VerificationReport::from_json(&s) {
            let back = VerificationReport::from_json(&report.to_json()).unwrap();
            assert_eq!(back, report);
            ok += 1;
        }
    }
    assert!(ok >= 2);
}
