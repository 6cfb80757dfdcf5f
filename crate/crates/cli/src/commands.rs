//! The `run` and `scorecard` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use pct_core::adversaries::{analyze, privacy_run, run_attack_in, PRIVACY_COLUMNS};
use pct_core::analysis::{
    attacks_csv, build_scorecard, cost_ledger, diff_csv, diff_text, leakage_csv, ledger_csv,
    scorecard_csv, scorecard_diff, scorecard_text, ExpectedMatrices, SuiteFile,
};
use pct_core::error::Error;
use pct_core::protocols::ProtocolId;
use pct_core::simulation::{generate_world, ground_truth_oracle, run, Scenario};

use crate::{Common, Format};

/// A command failure with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: exit 2.
    #[error("{0}")]
    Input(String),
    /// A simulation or write failed: exit 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }
}

fn input(e: Error) -> CliError {
    CliError::Input(e.to_string())
}

fn failure(e: Error) -> CliError {
    CliError::Failure(e.to_string())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Failure(format!("{}: {e}", dir.join(name).display())))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("output directory {}: {e}", dir.display())))
}

/// Loads and overrides a scenario, runs it and writes its reports.
pub fn run_command(
    path: &Path,
    protocol: Option<&str>,
    common: &Common,
) -> Result<ExitCode, CliError> {
    let mut scenario = Scenario::load(path).map_err(input)?;
    if let Some(p) = protocol {
        scenario.protocol = ProtocolId::parse(p).map_err(input)?;
    }
    if let Some(seed) = common.seed {
        scenario.rng_seed = seed;
    }
    scenario.validate().map_err(input)?;
    prepare_out(&common.out)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "scenario   {}", scenario.name);
    let _ = writeln!(summary, "protocol   {}", scenario.protocol.name());
    let _ = writeln!(summary, "seed       {}", scenario.rng_seed);
    let _ = writeln!(summary, "users      {}", scenario.num_users);
    let _ = writeln!(summary, "days       {}", scenario.num_days);

    let mut csvs: Vec<(&str, String)> = Vec::new();
    let attacked = scenario.adversaries.iter().any(|a| a.attack.is_some());
    if attacked {
        let (outcome, result) = run_attack_in(&scenario).map_err(failure)?;
        let _ = writeln!(summary, "attack     {}", outcome.attack.name());
        let _ = writeln!(
            summary,
            "false exposures        {}",
            outcome.false_exposures
        );
        let _ = writeln!(
            summary,
            "rate limit applicable  {}",
            outcome.rate_limit_applicable
        );
        let _ = writeln!(
            summary,
            "attacker flagged       {}",
            outcome.attacker_flagged
        );
        let _ = writeln!(summary, "cell                   {}", outcome.cell.symbol());
        let _ = writeln!(
            summary,
            "exposed users          {}",
            result
                .exposed(scenario.exposure.exposure_threshold_minutes)
                .len()
        );
        csvs.push(("attacks.csv", attacks_csv(&[&outcome]).map_err(failure)?));
    } else {
        let world = generate_world(&scenario).map_err(failure)?;
        let result = run(&scenario).map_err(failure)?;
        let oracle = ground_truth_oracle(&world, &scenario.exposure);
        let mut exposures = String::from("user,day,detected_minutes,oracle_minutes\n");
        let keys: std::collections::BTreeSet<_> = result
            .detected
            .keys()
            .chain(oracle.risk.keys())
            .copied()
            .collect();
        for k in &keys {
            let d = result.detected.get(k).copied().unwrap_or(0);
            let o = oracle.risk.get(k).copied().unwrap_or(0);
            let _ = writeln!(exposures, "{},{},{d},{o}", k.0, k.1);
        }
        let agree = keys
            .iter()
            .filter(|k| result.detected.get(k) == oracle.risk.get(k))
            .count();
        let _ = writeln!(summary, "encounters {}", world.encounters.len());
        let _ = writeln!(summary, "patients   {}", world.diagnoses.len());
        let _ = writeln!(
            summary,
            "exposures  {} detected, {} by ground truth, {agree} identical",
            result.detected.len(),
            oracle.risk.len()
        );
        let ledger = cost_ledger(&result, &scenario, scenario.num_days - 1).map_err(failure)?;
        let c = ledger.summary();
        let _ = writeln!(
            summary,
            "cost (day {})  upload {}  download {}  user-comp {}  server-comp {}  report {}",
            ledger.day,
            c.user_upload,
            c.user_download,
            c.user_comp,
            c.server_comp,
            c.patient_report
        );
        let privacy = privacy_run(&scenario)
            .and_then(|r| analyze(&r))
            .map_err(failure)?;
        let marks: Vec<String> = PRIVACY_COLUMNS
            .iter()
            .map(|c| format!("{c}={}", privacy.marks.get(*c).map_or("?", |m| m.symbol())))
            .collect();
        let _ = writeln!(summary, "privacy    {}", marks.join(" "));
        let mut world_csv = Vec::new();
        world.write_csv(&mut world_csv).map_err(failure)?;
        csvs.push((
            "world.csv",
            String::from_utf8(world_csv).map_err(|e| CliError::Failure(e.to_string()))?,
        ));
        csvs.push(("exposures.csv", exposures));
        csvs.push(("ledger.csv", ledger_csv(&ledger).map_err(failure)?));
        csvs.push((
            "leakage.csv",
            leakage_csv(&[(scenario.protocol, &privacy)]).map_err(failure)?,
        ));
    }

    if common.format.contains(&Format::Csv) {
        for (name, body) in &csvs {
            write(&common.out, name, body)?;
        }
    }
    if common.format.contains(&Format::Table) {
        write(&common.out, "summary.txt", &summary)?;
    }
    print!("{summary}");
    Ok(ExitCode::SUCCESS)
}

/// Runs the suite, writes the scorecard and the diff; exit 0 iff every
/// check ran and the diff is empty.
pub fn scorecard_command(
    suite: Option<&Path>,
    expected: Option<&Path>,
    only: &[String],
    workers: Option<usize>,
    common: &Common,
) -> Result<ExitCode, CliError> {
    let expected = match expected {
        Some(p) => ExpectedMatrices::load(p).map_err(input)?,
        None => ExpectedMatrices::shipped(),
    };
    let suite = match suite {
        Some(p) => SuiteFile::load(p).map_err(input)?,
        None => SuiteFile::default(),
    };
    let mut cfg = suite.config();
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(w) = workers {
        cfg.workers = w.max(1);
    }
    if !only.is_empty() {
        cfg.protocols = only
            .iter()
            .map(|n| ProtocolId::parse(n))
            .collect::<Result<_, _>>()
            .map_err(input)?;
    }
    prepare_out(&common.out)?;

    let (sc, failures) = build_scorecard(&cfg, Some(&expected));
    let diff = scorecard_diff(&sc, &expected);
    if common.format.contains(&Format::Csv) {
        write(
            &common.out,
            "scorecard.csv",
            &scorecard_csv(&sc).map_err(failure)?,
        )?;
        write(&common.out, "diff.csv", &diff_csv(&diff).map_err(failure)?)?;
        let leak: Vec<_> = sc
            .rows
            .iter()
            .filter_map(|(p, r)| r.leakage.as_ref().map(|l| (*p, l)))
            .collect();
        write(
            &common.out,
            "leakage.csv",
            &leakage_csv(&leak).map_err(failure)?,
        )?;
        let attacks: Vec<_> = sc.rows.values().flat_map(|r| r.attacks.values()).collect();
        write(
            &common.out,
            "attacks.csv",
            &attacks_csv(&attacks).map_err(failure)?,
        )?;
    }
    let text = scorecard_text(&sc);
    let dtext = diff_text(&diff);
    if common.format.contains(&Format::Table) {
        write(&common.out, "scorecard.txt", &text)?;
        write(&common.out, "diff.txt", &dtext)?;
    }
    print!("{text}{dtext}");
    if !failures.is_empty() {
        eprintln!("{} checks failed to run:", failures.len());
        for f in &failures {
            eprintln!("  {} {}: {}", f.protocol.name(), f.section, f.error);
        }
        return Ok(ExitCode::from(1));
    }
    Ok(if diff.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
