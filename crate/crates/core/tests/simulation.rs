//! Engine behaviour against the ground-truth oracle, scenario parsing and
//! determinism.

use pct_core::analysis::{cost_ledger, measure_cost, STEADY_DAY};
use pct_core::protocols::ProtocolId;
use pct_core::simulation::{
    generate_world, ground_truth_oracle, run, Scenario, Script, ScriptedEncounter, WorldMode,
};
use pct_core::Error;
use proptest::prelude::*;

fn protocol(name: &str) -> ProtocolId {
    ProtocolId::parse(name).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Every design, in honest small random worlds, detects exactly the
    /// oracle's exposures.
    #[test]
    fn honest_runs_equal_the_oracle(
        which in 0usize..11,
        seed in any::<u64>(),
        users in 12u32..30,
        days in 4u32..10,
        contacts in 2u32..6,
    ) {
        let s = Scenario::new(ProtocolId::ALL[which], users, days, 1, contacts, seed);
        let world = generate_world(&s).unwrap();
        let oracle = ground_truth_oracle(&world, &s.exposure);
        let r = run(&s).unwrap();
        prop_assert!(r.aborted_rounds.is_empty());
        prop_assert_eq!(&r.detected, &oracle.risk);
    }
}

#[test]
fn runs_are_deterministic() {
    let s = Scenario::new(protocol("agreed-server-sdh"), 30, 8, 1, 4, 11);
    let (a, b) = (run(&s).unwrap(), run(&s).unwrap());
    assert_eq!(a.detected, b.detected);
    assert_eq!(a.daily_costs, b.daily_costs);
    let mut wa = Vec::new();
    let mut wb = Vec::new();
    a.world.write_csv(&mut wa).unwrap();
    b.world.write_csv(&mut wb).unwrap();
    assert_eq!(wa, wb);
}

#[test]
fn different_seeds_give_different_worlds() {
    let p = protocol("sent-user-daily");
    let a = generate_world(&Scenario::new(p, 30, 5, 1, 4, 1)).unwrap();
    let b = generate_world(&Scenario::new(p, 30, 5, 1, 4, 2)).unwrap();
    assert_ne!(a.encounters, b.encounters);
}

#[test]
fn nobody_adopting_detects_nothing() {
    let mut s = Scenario::new(protocol("received-user-basic"), 30, 8, 1, 4, 5);
    s.adoption_rate = 0.0;
    let r = run(&s).unwrap();
    assert!(r.detected.is_empty());
    assert!(r.adopters.is_empty());
}

#[test]
fn adoption_picks_the_rounded_share_of_users() {
    let mut s = Scenario::new(protocol("sent-user-daily"), 40, 3, 1, 4, 5);
    s.adoption_rate = 0.3;
    assert_eq!(run(&s).unwrap().adopters.len(), 12);
}

fn scripted(
    p: ProtocolId,
    users: u32,
    days: u32,
    encounters: Vec<ScriptedEncounter>,
    diagnoses: Vec<(u32, u32)>,
) -> Scenario {
    let mut s = Scenario::new(p, users, days, 0, 0, 3);
    s.world = WorldMode::Scripted;
    s.script = Some(Script {
        encounters,
        diagnoses,
    });
    s
}

fn meet(a: u32, b: u32, start_minute: u32, minutes: u32) -> ScriptedEncounter {
    ScriptedEncounter {
        a,
        b,
        start_minute,
        minutes,
        distance_m: 1.0,
        cell: 0,
    }
}

#[test]
fn received_user_publishes_a_beacon_reported_twice_only_once() {
    // Users 1 and 2 both hear user 0 in the same slot, then both report.
    let s = scripted(
        protocol("received-user-basic"),
        4,
        2,
        vec![meet(0, 1, 600, 20), meet(0, 2, 600, 20)],
        vec![(1, 1), (2, 1)],
    );
    let r = run(&s).unwrap();
    let day1 = r.daily_costs.iter().find(|c| c.day == 1).unwrap();
    let reported: u64 = day1.report_units.values().sum();
    assert_eq!(reported, 4, "two patients, two slot fragments each");
    assert_eq!(
        day1.round.download_units[&3], 2,
        "the shared beacons are published once"
    );
    assert_eq!(r.detected.get(&(0, 1)), Some(&40));
}

#[test]
fn short_and_far_encounters_are_not_exposures() {
    let mut far = meet(0, 1, 600, 30);
    far.distance_m = 5.0;
    let s = scripted(
        protocol("agreed-user-pronto"),
        3,
        2,
        vec![far, meet(0, 2, 900, 1)],
        vec![(0, 1)],
    );
    assert!(run(&s).unwrap().detected.is_empty());
}

#[test]
fn users_diagnosed_earlier_receive_no_risk() {
    // User 1 is diagnosed on day 1, user 0 on day 2: only user 1's report
    // can expose user 0, and user 1 no longer takes part on day 2.
    let s = scripted(
        protocol("sent-server"),
        2,
        3,
        vec![meet(0, 1, 600, 20)],
        vec![(1, 1), (0, 2)],
    );
    let r = run(&s).unwrap();
    let oracle = ground_truth_oracle(&r.world, &s.exposure);
    assert_eq!(r.detected, oracle.risk);
    assert_eq!(r.detected.keys().copied().collect::<Vec<_>>(), vec![(0, 1)]);
}

#[test]
fn scenario_json_round_trips() {
    let mut s = Scenario::new(protocol("agreed-interactive-desire"), 40, 6, 2, 6, 9);
    s.loss_prob = 0.1;
    let back = Scenario::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn malformed_scenarios_report_line_and_column() {
    let err = Scenario::from_json("{\n  \"num_users\": 10,\n  \"bogus\": 1\n}").unwrap_err();
    let Error::Parse(msg) = err else {
        panic!("expected a parse error")
    };
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn out_of_range_parameters_are_rejected() {
    let mut s = Scenario::new(protocol("sent-user-basic"), 10, 3, 1, 2, 1);
    s.loss_prob = 1.0;
    assert!(matches!(s.validate(), Err(Error::Config(_))));
    let mut s = Scenario::new(protocol("sent-user-basic"), 10, 3, 1, 2, 1);
    s.adoption_rate = 1.5;
    assert!(s.validate().is_err());
    assert!(Scenario::new(protocol("sent-user-basic"), 10, 3, 11, 2, 1)
        .validate()
        .is_err());
    assert!(Scenario::new(protocol("sent-user-basic"), 0, 3, 0, 2, 1)
        .validate()
        .is_err());
}

#[test]
fn unknown_protocol_names_are_rejected() {
    assert!(ProtocolId::parse("sent-user-weekly").is_err());
    for p in ProtocolId::ALL {
        assert_eq!(ProtocolId::parse(p.name()).unwrap(), p);
    }
}

#[test]
fn ten_patients_cost_sent_user_basic_users_20160_downloads() {
    let l = measure_cost(protocol("sent-user-basic"), 40, 10, 4, 1).unwrap();
    assert_eq!(l.summary().user_download, 20_160);
    assert_eq!(l.summary().patient_report, 2016);
}

#[test]
fn without_patients_patient_driven_costs_vanish() {
    for name in [
        "sent-user-basic",
        "received-server-robert",
        "agreed-server-sdh",
    ] {
        let c = measure_cost(protocol(name), 20, 0, 4, 1).unwrap().summary();
        assert_eq!(
            (
                c.user_download,
                c.patient_report,
                c.server_comp,
                c.user_comp
            ),
            (0, 0, 0, 0),
            "{name}"
        );
    }
}

#[test]
fn sdh_upload_is_the_daily_contact_count() {
    let c = measure_cost(protocol("agreed-server-sdh"), 40, 1, 20, 1)
        .unwrap()
        .summary();
    assert_eq!(c.user_upload, 20);
}

#[test]
fn cost_ledgers_refuse_attacked_runs() {
    let mut s = pct_core::adversaries::attack_scenario(
        protocol("sent-user-basic"),
        pct_core::adversaries::AttackId::DriveByEavesdrop,
        1,
    );
    let r = run(&s).unwrap();
    assert!(cost_ledger(&r, &s, 0).is_err());
    s.adversaries.clear();
    assert!(cost_ledger(&r, &s, STEADY_DAY + 50).is_err());
}
