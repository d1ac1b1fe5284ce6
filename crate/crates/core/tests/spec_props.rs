mod common;

use std::collections::BTreeSet;

use common::*;
use guigen_core::harness::corpus::random_spec;
use guigen_core::spec::{from_json, to_json, validate, SpecError, ViolationCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn thousand_generated_specs_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for i in 0..1000 {
        let spec = random_spec(&mut rng, 10);
        let text = to_json(&spec).unwrap_or_else(|e| panic!("spec {i}: {e}"));
        let back = from_json(&text).unwrap();
        assert_eq!(back, spec, "spec {i}");
        assert_eq!(to_json(&back).unwrap(), text, "spec {i}");
    }
}

#[test]
fn built_specs_are_byte_idempotent() {
    for spec in [intervor_spec(), small_spec()] {
        let text = to_json(&spec).unwrap();
        assert_eq!(to_json(&from_json(&text).unwrap()).unwrap(), text);
        assert!(text.ends_with("}\n"));
    }
}

#[test]
fn every_invariant_has_a_corruption() {
    let base = small_spec();
    assert!(validate(&base).is_clean());
    for (i, (code, corrupt)) in CORRUPTIONS.iter().enumerate() {
        let mut spec = base.clone();
        corrupt(&mut spec);
        let report = validate(&spec);
        assert!(report.codes().contains(code), "corruption {i}: expected {code:?}, got {:?}", report.codes());
        // Serialization refuses, and loading the raw document reports it too.
        assert!(to_json(&spec).is_err());
        let raw = serde_json::to_string_pretty(&spec).unwrap();
        match from_json(&raw) {
            Err(SpecError::SchemaMismatch { .. }) => assert_eq!(*code, ViolationCode::SchemaMismatch),
            Err(SpecError::Invalid(r)) => assert!(r.codes().contains(code)),
            other => panic!("corruption {i}: {other:?}"),
        }
    }
    let covered: BTreeSet<_> = CORRUPTIONS.iter().map(|(c, _)| *c).collect();
    let all: BTreeSet<_> = ViolationCode::ALL.into_iter().collect();
    assert_eq!(covered, all);
}

#[test]
fn violations_point_at_the_offending_field() {
    let mut spec = small_spec();
    spec.flags[1].flag.default = "yes".into();
    let report = validate(&spec);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].path, "/flags/1/flag/default");
}

#[test]
fn loader_rejects_bad_documents() {
    assert!(matches!(from_json("{"), Err(SpecError::JsonSyntax(_))));
    assert!(matches!(from_json("{}"), Err(SpecError::SchemaMismatch { .. })));
    let mut v: serde_json::Value = serde_json::from_str(&to_json(&small_spec()).unwrap()).unwrap();
    v["widgets"][0]["colour"] = "red".into();
    assert!(matches!(from_json(&v.to_string()), Err(SpecError::Shape(_))));
}
