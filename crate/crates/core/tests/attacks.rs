//! Resiliency attacks: conservation in honest runs, the outcome matrix
//! against the shipped reference and the phone-side device cap.

use pct_core::adversaries::{
    exhaustion_cost, false_exposures, resilience_row, run_attack, AttackId, ResilienceCell,
};
use pct_core::analysis::ExpectedMatrices;
use pct_core::protocols::ProtocolId;
use pct_core::simulation::{generate_world, ground_truth_oracle, run, Scenario};

fn protocol(name: &str) -> ProtocolId {
    ProtocolId::parse(name).unwrap()
}

#[test]
fn honest_runs_cause_no_false_exposures() {
    for p in ProtocolId::ALL {
        let s = Scenario::new(p, 40, 8, 1, 6, 21);
        let oracle = ground_truth_oracle(&generate_world(&s).unwrap(), &s.exposure);
        let r = run(&s).unwrap();
        assert!(false_exposures(&r, &oracle).is_empty(), "{}", p.name());
        assert!(
            r.rate_limit_flags.is_empty(),
            "{}: honest patients flagged",
            p.name()
        );
    }
}

#[test]
fn outcome_matrix_matches_the_reference() {
    let expected = ExpectedMatrices::shipped();
    for p in ProtocolId::ALL {
        let row = resilience_row(p, 3).unwrap();
        for a in AttackId::SCORED {
            assert_eq!(
                row[&a].cell,
                expected.resilience[&p][&a],
                "{} {}",
                p.name(),
                a.name()
            );
            assert_eq!(
                row[&a].false_exposures > 0,
                row[&a].cell != ResilienceCell::Resistant
            );
        }
    }
}

#[test]
fn rate_limits_apply_to_received_and_agreed_but_not_sent_user() {
    for (name, applicable) in [
        ("sent-user-basic", false),
        ("sent-interactive-epione", false),
        ("sent-server", true),
        ("received-user-basic", true),
        ("agreed-server-sdh", true),
    ] {
        let o = run_attack(protocol(name), AttackId::SameBeacon, 3, false).unwrap();
        assert_eq!(o.rate_limit_applicable, applicable, "{name}");
    }
}

#[test]
fn attacks_are_deterministic() {
    let p = protocol("received-server-robert");
    assert_eq!(
        run_attack(p, AttackId::Tunneling, 9, false).unwrap(),
        run_attack(p, AttackId::Tunneling, 9, false).unwrap()
    );
}

#[test]
fn the_device_cap_suppresses_pooled_streams() {
    let p = protocol("sent-user-basic");
    let capped = run_attack(p, AttackId::Pooling, 3, true).unwrap();
    let uncapped = run_attack(p, AttackId::Pooling, 3, false).unwrap();
    assert!(capped.device_cap_suppressed > 0);
    assert_eq!(uncapped.device_cap_suppressed, 0);
}

#[test]
fn junk_reports_inflate_downloads_and_trip_the_size_cap_where_it_applies() {
    let sent = exhaustion_cost(protocol("sent-user-basic"), 3).unwrap();
    assert!(sent.attacked_download > sent.baseline_download);
    assert!(!sent.attacker_flagged);
    let received = exhaustion_cost(protocol("received-user-basic"), 3).unwrap();
    assert!(received.attacked_download > received.baseline_download);
    assert!(received.attacker_flagged);
}
