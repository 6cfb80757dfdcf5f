//! Leakage analysis: structural properties of adversary views, capability
//! monotonicity and the interactive exposure-time probe.

use pct_core::adversaries::{
    adversary_view, analyze, exposure_time_probe, privacy_run, privacy_scenario, AdversaryKind,
    LeakageReport, Mark, PrivacyRun,
};
use pct_core::protocols::ProtocolId;

fn protocol(name: &str) -> ProtocolId {
    ProtocolId::parse(name).unwrap()
}

fn instrumented(name: &str, seed: u64) -> (PrivacyRun, LeakageReport) {
    let run = privacy_run(&privacy_scenario(protocol(name), seed)).unwrap();
    let rep = analyze(&run).unwrap();
    (run, rep)
}

fn rank(m: Mark) -> u8 {
    match m {
        Mark::Protected => 0,
        Mark::Partial => 1,
        Mark::Leaks => 2,
    }
}

#[test]
fn passive_views_never_hold_broadcast_secrets() {
    for name in [
        "sent-server",
        "agreed-server-sdh",
        "received-user-cleverparrot",
    ] {
        let run = privacy_run(&privacy_scenario(protocol(name), 3)).unwrap();
        for kind in AdversaryKind::ALL {
            let view = adversary_view(&run, kind).unwrap();
            if !kind.is_active() {
                assert!(view.own_secrets.is_empty(), "{name} {kind:?}");
            }
            if !kind.has_surveillance() {
                assert!(view.observed.is_empty(), "{name} {kind:?}");
            }
        }
    }
    // Active devices keep the secrets behind their DH beacons.
    let run = privacy_run(&privacy_scenario(protocol("agreed-server-sdh"), 3)).unwrap();
    assert!(!adversary_view(&run, AdversaryKind::ServerAsv)
        .unwrap()
        .own_secrets
        .is_empty());
}

#[test]
fn active_surveillance_never_learns_less_than_passive() {
    for p in ProtocolId::ALL {
        let rep = analyze(&privacy_run(&privacy_scenario(p, 5)).unwrap()).unwrap();
        for (psv, asv) in [
            ("trace-all-server-psv", "trace-all-server-asv"),
            ("trace-patient-server-psv", "trace-patient-server-asv"),
        ] {
            assert!(
                rank(rep.marks[psv]) <= rank(rep.marks[asv]),
                "{}: {psv} vs {asv}",
                p.name()
            );
        }
    }
}

#[test]
fn analysis_is_deterministic() {
    let (_, a) = instrumented("received-server-robert", 4);
    let (_, b) = instrumented("received-server-robert", 4);
    assert_eq!(a, b);
}

#[test]
fn server_matching_leaks_non_exposure_interactions_only_for_sent_server() {
    let (_, sent) = instrumented("sent-server", 6);
    assert_eq!(sent.marks["user-user-no-exposure"], Mark::Leaks);
    let (_, sdh) = instrumented("agreed-server-sdh", 6);
    assert_eq!(sdh.marks["user-user-no-exposure"], Mark::Protected);
    assert_eq!(sdh.marks["trace-all-server-psv"], Mark::Protected);
    assert_eq!(sdh.marks["trace-all-server-asv"], Mark::Leaks);
}

#[test]
fn user_matching_reveals_exposure_slots_to_users() {
    let (_, rep) = instrumented("sent-user-basic", 6);
    assert_eq!(rep.marks["patient-identity"], Mark::Leaks);
    assert!(rep.exposure_times.values().any(|v| !v.is_empty()));
    let (_, sdh) = instrumented("agreed-server-sdh", 6);
    assert_eq!(sdh.marks["patient-identity"], Mark::Protected);
    assert!(sdh.exposure_times.values().all(Vec::is_empty));
}

#[test]
fn bisection_isolates_a_desire_match_within_log_queries() {
    let (run, _) = instrumented("agreed-interactive-desire", 7);
    let probe = exposure_time_probe(&run)
        .unwrap()
        .expect("interactive design");
    assert!(probe.success && !probe.aborted);
    let log2_ceil = usize::BITS - (probe.candidates.max(1) - 1).leading_zeros();
    assert!(probe.queries <= log2_ceil + 1, "{probe:?}");
}

#[test]
fn ri_psi_aborts_a_truncated_reupload() {
    let (run, _) = instrumented("received-interactive-ripsi", 7);
    let probe = exposure_time_probe(&run)
        .unwrap()
        .expect("interactive design");
    assert!(probe.aborted && !probe.success);
}

#[test]
fn non_interactive_designs_have_no_probe() {
    let (run, _) = instrumented("sent-user-daily", 7);
    assert!(exposure_time_probe(&run).unwrap().is_none());
}
