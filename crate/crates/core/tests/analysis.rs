//! Expected-matrix loading, flaw derivation, cost-formula checks, diffing
//! and report rendering, on synthetic scorecards.

use std::collections::BTreeMap;

use pct_core::adversaries::{AttackId, Mark, ResilienceCell, PRIVACY_COLUMNS};
use pct_core::analysis::{
    cell_seed, check_cost, diff_csv, diff_text, evaluate, flaw_flags, follows_growth, growth,
    scorecard_csv, scorecard_diff, scorecard_text, CheckStatus, CostCheck, CostColumn, CostPoint,
    CostSummary, ExpectedMatrices, FlagValue, Flaw, Scorecard, ScorecardRow, SuiteFile, Term,
    DEFAULT_EXPECTED,
};
use pct_core::protocols::ProtocolId;
use pct_core::Error;
use proptest::prelude::*;

fn protocol(name: &str) -> ProtocolId {
    ProtocolId::parse(name).unwrap()
}

fn mark_strategy() -> impl Strategy<Value = Mark> {
    prop_oneof![
        Just(Mark::Leaks),
        Just(Mark::Partial),
        Just(Mark::Protected)
    ]
}

fn cell_strategy() -> impl Strategy<Value = ResilienceCell> {
    prop_oneof![
        Just(ResilienceCell::Resistant),
        Just(ResilienceCell::Mitigated),
        Just(ResilienceCell::Vulnerable)
    ]
}

fn row_strategy() -> impl Strategy<Value = ScorecardRow> {
    (
        prop::collection::vec(mark_strategy(), PRIVACY_COLUMNS.len()),
        prop::collection::vec(cell_strategy(), AttackId::SCORED.len()),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(marks, cells, rate_limit, download_grows)| {
            let mut row = ScorecardRow {
                privacy: PRIVACY_COLUMNS
                    .iter()
                    .map(|c| c.to_string())
                    .zip(marks)
                    .collect(),
                resilience: AttackId::SCORED.into_iter().zip(cells).collect(),
                rate_limit_applicable: rate_limit,
                cost: Some(cost_check(if download_grows { 2 } else { 1 })),
                ..ScorecardRow::default()
            };
            row.flaws = flaw_flags(&row);
            row
        })
}

fn cost_check(download_factor: u64) -> CostCheck {
    let base = CostSummary {
        user_download: 10,
        ..CostSummary::default()
    };
    let doubled = CostSummary {
        user_download: 10 * download_factor,
        ..CostSummary::default()
    };
    CostCheck {
        point: CostPoint::default(),
        base,
        doubled_patients: doubled,
        doubled_contacts: base,
        checks: BTreeMap::new(),
    }
}

fn rank(v: FlagValue) -> u8 {
    match v {
        FlagValue::Clear => 0,
        FlagValue::Partial => 1,
        FlagValue::Set => 2,
        FlagValue::Unknown => 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn a_scorecard_never_differs_from_itself(rows in prop::collection::vec(row_strategy(), 1..11)) {
        let rows = ProtocolId::ALL.into_iter().zip(rows).map(|(p, mut row)| {
            row.protocol = Some(p);
            row.flaws = flaw_flags(&row);
            (p, row)
        });
        let sc = Scorecard { seed: 1, rows: rows.collect() };
        let expected = ExpectedMatrices::from_scorecard(&sc);
        prop_assert!(scorecard_diff(&sc, &expected).is_empty());
        let reloaded = ExpectedMatrices::from_json(&expected.to_json()).unwrap();
        prop_assert!(scorecard_diff(&sc, &reloaded).is_empty());
    }

    /// Raising what a stronger adversary learns never clears a flag.
    #[test]
    fn stronger_adversaries_never_clear_flags(row in row_strategy(), column in 0usize..11) {
        let before = flaw_flags(&row);
        let mut stronger = row.clone();
        let col = PRIVACY_COLUMNS[column].to_string();
        let raised = match row.privacy[&col] {
            Mark::Protected => Mark::Partial,
            _ => Mark::Leaks,
        };
        stronger.privacy.insert(col, raised);
        let after = flaw_flags(&stronger);
        for f in Flaw::ALL {
            prop_assert!(rank(after[&f]) >= rank(before[&f]), "{:?}", f);
        }
    }

    #[test]
    fn exact_scaling_follows_growth(base in 1u64..1_000_000, p in 0u32..3, s in 0u32..3) {
        prop_assert!(follows_growth((p, s), base, base << p, base << s));
        prop_assert!(!follows_growth((p, s), base, (base << p) * 3, base << s));
    }

    #[test]
    fn formulas_evaluate_as_monomials(coef in 1u64..1000, n in 1u32..200, pp in 0u32..10, s in 1u32..40) {
        let f = vec![Term { coef, p: 1, s: 1, n: 0 }, Term { coef: 14, p: 0, s: 0, n: 1 }];
        prop_assert_eq!(evaluate(&f, n, pp, s), coef * u64::from(pp) * u64::from(s) + 14 * u64::from(n));
    }
}

fn row_with(marks: &[(&str, Mark)], protocol: ProtocolId) -> ScorecardRow {
    let mut privacy: BTreeMap<String, Mark> = PRIVACY_COLUMNS
        .iter()
        .map(|c| (c.to_string(), Mark::Protected))
        .collect();
    for (c, m) in marks {
        privacy.insert(c.to_string(), *m);
    }
    ScorecardRow {
        protocol: Some(protocol),
        privacy,
        resilience: AttackId::SCORED
            .into_iter()
            .map(|a| (a, ResilienceCell::Resistant))
            .collect(),
        rate_limit_applicable: true,
        cost: Some(cost_check(1)),
        ..ScorecardRow::default()
    }
}

fn set_flags(flags: &BTreeMap<Flaw, FlagValue>) -> Vec<Flaw> {
    flags
        .iter()
        .filter(|(_, v)| **v == FlagValue::Set)
        .map(|(f, _)| *f)
        .collect()
}

#[test]
fn sent_server_style_leaks_give_its_flaw_set() {
    let row = row_with(
        &[
            ("user-user-no-exposure", Mark::Leaks),
            ("trace-all-server-psv", Mark::Leaks),
            ("trace-patient-server-psv", Mark::Leaks),
            ("trace-all-server-asv", Mark::Leaks),
        ],
        protocol("sent-server"),
    );
    assert_eq!(
        set_flags(&flaw_flags(&row)),
        vec![Flaw::Df1, Flaw::Df2a, Flaw::Df2b, Flaw::Df2c]
    );
}

#[test]
fn broadcast_vulnerability_without_rate_limit_is_df4() {
    let mut row = row_with(
        &[("patient-identity", Mark::Leaks)],
        protocol("sent-user-daily"),
    );
    row.resilience
        .insert(AttackId::HighPowerBroadcast, ResilienceCell::Vulnerable);
    row.rate_limit_applicable = false;
    row.cost = Some(cost_check(2));
    assert_eq!(
        set_flags(&flaw_flags(&row)),
        vec![Flaw::Df3, Flaw::Df4, Flaw::Df5a]
    );
    row.rate_limit_applicable = true;
    assert_eq!(flaw_flags(&row)[&Flaw::Df4], FlagValue::Clear);
}

#[test]
fn missing_checks_make_flags_unknown() {
    let mut row = row_with(&[], protocol("agreed-server-sdh"));
    row.privacy.remove("patient-identity");
    row.resilience.remove(&AttackId::DriveByEavesdrop);
    row.cost = None;
    let flags = flaw_flags(&row);
    for f in [Flaw::Df3, Flaw::Df4, Flaw::Df5a] {
        assert_eq!(flags[&f], FlagValue::Unknown, "{f:?}");
    }
    row.protocol = None;
    assert_eq!(flaw_flags(&row)[&Flaw::Df5b], FlagValue::Unknown);
}

#[test]
fn undeployed_crypto_is_a_static_attribute() {
    for p in ProtocolId::ALL {
        let flag = flaw_flags(&row_with(&[], p))[&Flaw::Df5b];
        let expected = matches!(
            p.name(),
            "sent-interactive-epione" | "received-interactive-ripsi" | "agreed-user-pronto"
        );
        assert_eq!(flag == FlagValue::Set, expected, "{}", p.name());
    }
}

#[test]
fn shipped_matrices_cover_every_design() {
    let m = ExpectedMatrices::shipped();
    for p in ProtocolId::ALL {
        assert!(
            m.privacy.contains_key(&p) && m.resilience.contains_key(&p) && m.flaws.contains_key(&p),
            "{}",
            p.name()
        );
        assert!(m.cost.contains_key(&p), "{}", p.name());
    }
    assert_eq!(
        m.cost_point,
        CostPoint {
            num_users: 100,
            patients: 2,
            contacts: 20
        }
    );
    assert_eq!(ExpectedMatrices::from_json(&m.to_json()).unwrap(), m);
}

#[test]
fn shipped_cost_formulas_give_the_reference_counts() {
    let m = ExpectedMatrices::shipped();
    let at = |name: &str, col: CostColumn| {
        evaluate(m.cost[&protocol(name)][&col].as_ref().unwrap(), 100, 2, 20)
    };
    assert_eq!(at("sent-user-basic", CostColumn::UserDownload), 4032);
    assert_eq!(at("sent-user-daily", CostColumn::UserDownload), 28);
    assert_eq!(at("agreed-interactive-desire", CostColumn::UserUpload), 280);
    assert_eq!(at("agreed-server-sdh", CostColumn::UserUpload), 20);
    assert_eq!(at("received-server-robert", CostColumn::UserUpload), 2016);
    assert_eq!(at("received-user-basic", CostColumn::PatientReport), 280);
}

fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(DEFAULT_EXPECTED).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn an_unknown_protocol_in_the_matrix_is_a_load_error() {
    let text = edit(|v| {
        let row = v["privacy"]["sent-server"].clone();
        v["privacy"]["sent-user-weekly"] = row;
    });
    assert!(matches!(
        ExpectedMatrices::from_json(&text),
        Err(Error::Parse(_))
    ));
}

#[test]
fn incomplete_or_malformed_matrices_are_load_errors() {
    let cases = [
        edit(|v| {
            v["privacy"]["sent-server"]
                .as_object_mut()
                .unwrap()
                .remove("patient-patient");
        }),
        edit(|v| v["privacy"]["sent-server"]["patient-cousin"] = "leaks".into()),
        edit(|v| {
            v["flaws"]["agreed-server-sdh"]
                .as_object_mut()
                .unwrap()
                .remove("df3");
        }),
        edit(|v| v["flaws"]["agreed-server-sdh"]["df3"] = "unknown".into()),
        edit(|v| {
            v["resilience"]["agreed-server-sdh"]
                .as_object_mut()
                .unwrap()
                .remove("pooling");
        }),
        edit(|v| v["version"] = 99.into()),
        edit(|v| v["surprise"] = 1.into()),
        "{ \"version\": 1, ".to_string(),
    ];
    for text in cases {
        assert!(
            matches!(ExpectedMatrices::from_json(&text), Err(Error::Parse(_))),
            "{text:.80}"
        );
    }
}

#[test]
fn cost_checks_compare_tokens_exactly_and_computation_by_growth() {
    let formulas = BTreeMap::from([
        (
            CostColumn::UserUpload,
            Some(vec![Term {
                coef: 1,
                p: 0,
                s: 1,
                n: 0,
            }]),
        ),
        (CostColumn::UserDownload, Some(Vec::new())),
        (CostColumn::UserComp, None),
        (
            CostColumn::ServerComp,
            Some(vec![Term {
                coef: 196,
                p: 1,
                s: 2,
                n: 1,
            }]),
        ),
        (
            CostColumn::PatientReport,
            Some(vec![Term {
                coef: 14,
                p: 0,
                s: 1,
                n: 0,
            }]),
        ),
    ]);
    let at = |s: u64, server: u64| CostSummary {
        user_upload: s,
        user_download: 0,
        user_comp: 0,
        server_comp: server,
        patient_report: 14 * s,
    };
    let mut c = CostCheck {
        point: CostPoint::default(),
        base: at(20, 1000),
        doubled_patients: at(20, 2000),
        doubled_contacts: at(40, 4000),
        checks: BTreeMap::new(),
    };
    let checks = check_cost(&formulas, &c);
    assert!(
        checks.values().all(|s| *s != CheckStatus::Fail),
        "{checks:?}"
    );
    assert_eq!(checks[&CostColumn::UserComp], CheckStatus::NotApplicable);
    c.doubled_contacts.server_comp = 2000;
    c.base.user_upload = 21;
    let checks = check_cost(&formulas, &c);
    assert_eq!(checks[&CostColumn::ServerComp], CheckStatus::Fail);
    assert_eq!(checks[&CostColumn::UserUpload], CheckStatus::Fail);
    assert_eq!(
        growth(&formulas[&CostColumn::ServerComp].clone().unwrap()),
        (1, 2)
    );
}

#[test]
fn cell_seeds_are_distinct_and_stable() {
    let a = cell_seed(42, protocol("sent-server"), "privacy");
    assert_eq!(a, cell_seed(42, protocol("sent-server"), "privacy"));
    assert_ne!(a, cell_seed(43, protocol("sent-server"), "privacy"));
    assert_ne!(a, cell_seed(42, protocol("sent-user-basic"), "privacy"));
    assert_ne!(a, cell_seed(42, protocol("sent-server"), "pooling"));
}

#[test]
fn suite_files_are_strict() {
    let s = SuiteFile::from_json("{\"seed\": 7, \"protocols\": [\"sent-server\"]}").unwrap();
    assert_eq!(s.config().seed, 7);
    assert_eq!(s.config().protocols, vec![protocol("sent-server")]);
    assert!(SuiteFile::from_json("{\"protocols\": [\"sent-serverr\"]}").is_err());
    assert!(SuiteFile::from_json("{\"sed\": 7}").is_err());
}

fn sample_scorecard() -> Scorecard {
    let rows = [("sent-server", 2), ("agreed-server-sdh", 1)]
        .into_iter()
        .map(|(n, factor)| {
            let mut row = row_with(&[("trace-all-server-asv", Mark::Leaks)], protocol(n));
            row.cost = Some(cost_check(factor));
            row.flaws = flaw_flags(&row);
            (protocol(n), row)
        })
        .collect();
    Scorecard { seed: 42, rows }
}

#[test]
fn reports_have_fixed_headers_and_are_reproducible() {
    let sc = sample_scorecard();
    let csv = scorecard_csv(&sc).unwrap();
    assert!(csv.starts_with("protocol,table,column,value,source\n"));
    assert_eq!(csv, scorecard_csv(&sample_scorecard()).unwrap());
    assert!(csv.contains("agreed-server-sdh,flaws,df2c,set,"));
    let text = scorecard_text(&sc);
    for title in ["Privacy", "Resiliency", "Cost", "Design flaws"] {
        assert!(text.contains(title), "{title}");
    }
}

#[test]
fn diffs_list_exactly_the_changed_cells() {
    let sc = sample_scorecard();
    let mut expected = ExpectedMatrices::from_scorecard(&sc);
    assert_eq!(
        diff_text(&scorecard_diff(&sc, &expected)),
        "no differences\n"
    );
    expected
        .privacy
        .get_mut(&protocol("sent-server"))
        .unwrap()
        .insert("patient-user".into(), Mark::Leaks);
    let diff = scorecard_diff(&sc, &expected);
    assert_eq!(diff.len(), 1);
    assert_eq!(
        (diff[0].table.as_str(), diff[0].column.as_str()),
        ("privacy", "patient-user")
    );
    assert_eq!(diff_csv(&diff).unwrap(), "protocol,table,column,expected,computed\nsent-server,privacy,patient-user,leaks,protected\n");
}
