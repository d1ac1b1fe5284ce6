mod common;

use std::collections::BTreeSet;

use common::*;
use guigen_core::flags::{
    parse_input_flags, parse_update_flags, to_input_document, to_update_document, FlagError, FlagKind, FlagSpec,
    RefreshTarget, UpdateFlagSpec,
};
use proptest::prelude::*;

/// Independent reading of the catalog format: split each record on `|`.
fn naive_split(doc: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for raw in doc.split('\n') {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.split('|').map(|s| s.trim().to_string()).collect());
    }
    out
}

#[test]
fn bundled_catalogs_match_naive_split() {
    let doc = read(intervor_step1().join("selected_flags.txt"));
    let parsed = parse_input_flags(&doc).unwrap();
    let rows = naive_split(&doc);
    assert_eq!(parsed.len(), rows.len());
    for (flag, row) in parsed.iter().zip(&rows) {
        assert_eq!(flag.token, row[0]);
        if row.len() == 1 {
            assert_eq!((flag.kind, flag.default.as_str()), (FlagKind::Bool, ""));
            assert_eq!(flag.label, row[0].trim_start_matches('-'));
        } else {
            assert_eq!(flag.kind.as_str(), row[1]);
            assert_eq!(flag.default, row[2]);
            assert_eq!(flag.label, row[3]);
        }
    }

    let doc = read(intervor_step1().join("update_area_flags.txt"));
    let parsed = parse_update_flags(&doc).unwrap();
    let rows = naive_split(&doc);
    assert_eq!(parsed.len(), rows.len());
    for (u, row) in parsed.iter().zip(&rows) {
        assert_eq!(u.flag.token, row[0]);
        let kind = if u.flag.choices.is_empty() {
            u.flag.kind.as_str().to_owned()
        } else {
            format!("enum({})", u.flag.choices.join(","))
        };
        assert_eq!(kind, row[1]);
        assert_eq!(u.flag.default, row[2]);
        let refresh: Vec<_> = u.refresh.iter().map(|r| r.as_str()).collect();
        let mut expected: Vec<_> = row[4].split(',').collect();
        expected.sort();
        assert_eq!(refresh, expected);
    }
}

#[test]
fn errors_carry_line_numbers() {
    let cases: &[(&str, usize)] = &[
        ("--a|bool||A\n\n--b|wat||B\n", 3),
        ("# c\n--a|int|x|A\n", 2),
        ("--a|bool||A\n--a|bool||A again\n", 2),
        ("--a|enum(x)|x|A\n", 1),
        ("--a|enum(x,y)|z|A\n", 1),
        ("--a|bool||A|extra\n", 1),
        ("no-dash|bool||A\n", 1),
    ];
    for (doc, line) in cases {
        assert_eq!(parse_input_flags(doc).unwrap_err().line(), *line, "{doc:?}");
    }
    assert!(matches!(parse_update_flags("--a|int|1|A|\n"), Err(FlagError::BadRefresh { line: 1, .. })));
    assert!(matches!(parse_update_flags("--a|int|1|A|sideways\n"), Err(FlagError::BadRefresh { .. })));
    assert!(matches!(parse_update_flags("--a\n"), Err(FlagError::BadLine { line: 1, .. })));
}

fn field() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_.,:;()*#/ \u{e9}\u{3b1}-]{0,12}".prop_map(|s| s.trim().to_owned())
}

fn label() -> impl Strategy<Value = String> {
    field().prop_filter("labels are non-empty", |l| !l.is_empty())
}

fn flag_spec() -> impl Strategy<Value = FlagSpec> {
    let token = "--[a-z][a-z0-9-]{0,10}";
    prop_oneof![
        (token, prop_oneof![Just(""), Just("true"), Just("false")], label())
            .prop_map(|(t, d, l)| FlagSpec::new(t, FlagKind::Bool, d, l)),
        (token, proptest::option::of(-1000i64..1000), label()).prop_map(|(t, d, l)| FlagSpec::new(
            t,
            FlagKind::Int,
            d.map(|v| v.to_string()).unwrap_or_default(),
            l
        )),
        (token, proptest::option::of(-1e6f64..1e6), label()).prop_map(|(t, d, l)| FlagSpec::new(
            t,
            FlagKind::Float,
            d.map(|v| v.to_string()).unwrap_or_default(),
            l
        )),
        (token, field(), label()).prop_map(|(t, d, l)| FlagSpec::new(t, FlagKind::String, d, l)),
        (token, field(), label()).prop_map(|(t, d, l)| FlagSpec::new(t, FlagKind::Infile, d, l)),
        (token, proptest::collection::btree_set("[a-z][a-z0-9_-]{0,6}", 2..5), any::<prop::sample::Index>(), label())
            .prop_map(|(t, choices, i, l)| {
                let choices: Vec<String> = choices.into_iter().collect();
                let d = choices[i.index(choices.len())].clone();
                FlagSpec { choices, ..FlagSpec::new(t, FlagKind::Enum, d, l) }
            }),
    ]
}

fn unique(flags: Vec<FlagSpec>) -> Vec<FlagSpec> {
    let mut seen = BTreeSet::new();
    flags.into_iter().filter(|f| seen.insert(f.token.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn input_catalog_round_trips(flags in proptest::collection::vec(flag_spec(), 0..12).prop_map(unique)) {
        let doc = to_input_document(&flags);
        prop_assert_eq!(parse_input_flags(&doc).unwrap(), flags.clone());
        prop_assert_eq!(naive_split(&doc).len(), flags.len());
    }

    #[test]
    fn update_catalog_round_trips(
        flags in proptest::collection::vec((flag_spec(), 1u8..4), 0..8)
            .prop_map(|v| {
                let mut seen = BTreeSet::new();
                v.into_iter()
                    .filter(|(f, _)| seen.insert(f.token.clone()))
                    .map(|(flag, bits)| {
                        let mut refresh = BTreeSet::new();
                        if bits & 1 != 0 { refresh.insert(RefreshTarget::Outputs); }
                        if bits & 2 != 0 { refresh.insert(RefreshTarget::Viewer); }
                        UpdateFlagSpec { flag, refresh }
                    })
                    .collect::<Vec<_>>()
            })
    ) {
        let doc = to_update_document(&flags);
        prop_assert_eq!(parse_update_flags(&doc).unwrap(), flags);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored(flags in proptest::collection::vec(flag_spec(), 0..6).prop_map(unique)) {
        let doc: String = to_input_document(&flags)
            .lines()
            .map(|l| format!("# note\n\n   {l}  \n"))
            .collect();
        prop_assert_eq!(parse_input_flags(&doc).unwrap(), flags);
    }
}
