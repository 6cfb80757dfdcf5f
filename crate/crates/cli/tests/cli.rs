//! End-to-end tests of the `pctsim` binary: outputs, reproducibility and
//! exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/scenarios")
        .join(name)
}

fn pctsim(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pctsim"));
    cmd.args(args).env_remove("PCTSIM_OUT_DIR");
    cmd
}

fn run_into(out: &Path, args: &[&str]) -> Output {
    let mut cmd = pctsim(args);
    cmd.arg("--out").arg(out);
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_reports_and_is_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let path = scenario("default.json");
    for d in &dirs {
        let o = run_into(d.path(), &["run", "--scenario", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in [
        "world.csv",
        "exposures.csv",
        "ledger.csv",
        "leakage.csv",
        "summary.txt",
    ] {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!a.is_empty(), "{name}");
        assert_eq!(a, b, "{name} differs between runs");
    }
    let exposures = fs::read_to_string(dirs[0].path().join("exposures.csv")).unwrap();
    assert!(exposures.starts_with("user,day,detected_minutes,oracle_minutes\n"));
    for line in exposures.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[2], f[3], "honest run disagrees with ground truth: {line}");
    }
}

#[test]
fn seed_and_protocol_overrides_change_the_run() {
    let d = tempfile::tempdir().unwrap();
    let path = scenario("default.json");
    let o = run_into(
        d.path(),
        &[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--protocol",
            "agreed-server-sdh",
            "--seed",
            "9",
            "--format",
            "table",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(d.path().join("summary.txt")).unwrap();
    assert!(
        summary.contains("agreed-server-sdh") && summary.contains("seed       9"),
        "{summary}"
    );
    assert!(
        !d.path().join("world.csv").exists(),
        "csv output was not requested"
    );
}

#[test]
fn the_output_directory_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let path = scenario("drive-by.json");
    let o = pctsim(&["run", "--scenario", path.to_str().unwrap()])
        .env("PCTSIM_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let attacks = fs::read_to_string(d.path().join("attacks.csv")).unwrap();
    assert!(attacks.lines().count() >= 2, "{attacks}");
    assert!(attacks.contains("drive-by-eavesdrop"), "{attacks}");
}

#[test]
fn a_missing_scenario_is_an_input_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run_into(
        d.path(),
        &["run", "--scenario", "/nonexistent/scenario.json"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_json_reports_its_position() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.json");
    fs::write(&bad, "{\n  \"num_users\": 10,\n  \"num_days\": ,\n}\n").unwrap();
    let o = run_into(
        &d.path().join("out"),
        &["run", "--scenario", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_protocols_are_input_errors() {
    let d = tempfile::tempdir().unwrap();
    let path = scenario("default.json");
    let o = run_into(
        d.path(),
        &[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--protocol",
            "sent-user-weekly",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run_into(d.path(), &["scorecard", "--only", "sent-user-weekly"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_input_errors() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.json");
    let text = fs::read_to_string(scenario("default.json"))
        .unwrap()
        .replace("\"loss_prob\": 0.0", "\"loss_prob\": 1.5");
    fs::write(&bad, text).unwrap();
    let o = run_into(
        &d.path().join("out"),
        &["run", "--scenario", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn a_corrupted_expected_file_is_an_input_error() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("expected.json");
    fs::write(&bad, "{ \"version\": 1, \"privacy\": ").unwrap();
    let o = run_into(
        &d.path().join("out"),
        &["scorecard", "--expected", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.path().join("out").join("scorecard.csv").exists());
}

#[test]
fn a_restricted_scorecard_diffs_only_the_chosen_design() {
    let d = tempfile::tempdir().unwrap();
    let o = run_into(d.path(), &["scorecard", "--only", "agreed-server-sdh"]);
    let diff = fs::read_to_string(d.path().join("diff.csv")).unwrap();
    assert!(diff.starts_with("protocol,table,column,expected,computed\n"));
    assert!(
        diff.lines()
            .skip(1)
            .all(|l| l.starts_with("agreed-server-sdh,")),
        "{diff}"
    );
    let expected_code = if diff.lines().count() == 1 { 0 } else { 1 };
    assert_eq!(o.status.code(), Some(expected_code), "{}", stderr(&o));
    let scorecard = fs::read_to_string(d.path().join("scorecard.csv")).unwrap();
    assert!(scorecard
        .lines()
        .skip(1)
        .all(|l| l.starts_with("agreed-server-sdh,")));
    for name in ["leakage.csv", "attacks.csv", "scorecard.txt", "diff.txt"] {
        assert!(d.path().join(name).exists(), "{name}");
    }
}
