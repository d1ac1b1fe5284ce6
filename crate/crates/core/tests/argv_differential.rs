mod common;

use guigen_core::harness::corpus::{bool_spec, random_spec, random_state};
use guigen_core::harness::{oracle_command, OracleError};
use guigen_core::presenter::{build_command, PresenterError, WidgetState, WidgetValue};
use guigen_core::spec::{validate, GuiSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn class(e: &PresenterError) -> OracleError {
    match e {
        PresenterError::UnknownWidget(_) => OracleError::UnknownWidget,
        PresenterError::StateTypeMismatch { .. } => OracleError::StateTypeMismatch,
        PresenterError::MissingRequiredFile { .. } => OracleError::MissingRequiredFile,
        other => panic!("unexpected error {other:?}"),
    }
}

fn agree(spec: &GuiSpec, entries: &[(String, WidgetValue)]) -> Result<(), String> {
    let state = WidgetState(entries.iter().cloned().collect());
    let ours = build_command(spec, &state).map(|p| p.argv).map_err(|e| class(&e));
    let theirs = oracle_command(spec, entries);
    if ours == theirs {
        Ok(())
    } else {
        Err(format!("state {entries:?}\nbuild_command {ours:?}\noracle {theirs:?}"))
    }
}

#[test]
fn fuzzed_pairs_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut oks = 0;
    for i in 0..10_000 {
        let spec = random_spec(&mut rng, 10);
        assert!(validate(&spec).is_clean(), "generator produced an invalid spec: {:?}", validate(&spec));
        let entries = random_state(&mut rng, &spec, 0.05);
        agree(&spec, &entries).unwrap_or_else(|e| panic!("case {i}: {e}"));
        oks += oracle_command(&spec, &entries).is_ok() as u32;
    }
    // Both paths are exercised.
    assert!(oks > 5_000 && oks < 10_000, "{oks}");
}

#[test]
fn all_boolean_subsets_up_to_twelve() {
    for k in 0..=12usize {
        let spec = bool_spec(k);
        for mask in 0u32..(1 << k) {
            let entries: Vec<_> = spec
                .flags
                .iter()
                .enumerate()
                .map(|(i, b)| (b.widget_id.clone(), WidgetValue::Bool(mask >> i & 1 == 1)))
                .collect();
            agree(&spec, &entries).unwrap();
            let expected: Vec<String> = std::iter::once("bools.exe".to_owned())
                .chain((0..k).filter(|i| mask >> i & 1 == 1).map(|i| format!("--b{i}")))
                .collect();
            assert_eq!(oracle_command(&spec, &entries).unwrap(), expected);
        }
    }
}

#[test]
fn empty_state_is_bare_exe() {
    let spec = bool_spec(4);
    assert_eq!(build_command(&spec, &WidgetState::new()).unwrap().argv, ["bools.exe"]);
    assert_eq!(oracle_command(&spec, &[]).unwrap(), ["bools.exe"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn argv_is_pure_and_ignores_state_order(seed in any::<u64>(), rotate in 0usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, 8);
        let entries = random_state(&mut rng, &spec, 0.0);
        let mut rotated = entries.clone();
        if !rotated.is_empty() {
            let n = rotate % rotated.len();
            rotated.rotate_left(n);
        }
        let a = build_command(&spec, &WidgetState(entries.into_iter().collect()));
        let b = build_command(&spec, &WidgetState(rotated.iter().cloned().collect()));
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let c = build_command(&spec, &WidgetState(rotated.into_iter().collect()));
        prop_assert_eq!(format!("{b:?}"), format!("{c:?}"));
    }
}
