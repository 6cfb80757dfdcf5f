//! CSV and aligned-text renderings of ledgers, leakage reports, attack
//! outcomes, scorecards and diffs.
//!
//! Every CSV has a fixed header (listed per function) and rows in a
//! deterministic order; floating-point values are printed with six
//! decimals so re-runs are byte-identical.

use std::fmt::Write as _;

use crate::adversaries::{AttackId, AttackOutcome, LeakageReport, PRIVACY_COLUMNS};
use crate::error::{Error, Result};
use crate::protocols::ProtocolId;

use super::cost::{CostColumn, CostLedger};
use super::expected::Flaw;
use super::scorecard::{DiffEntry, Scorecard};

fn write_csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// `protocol,day,user,upload_units,download_units,user_comparisons,report_units`.
///
/// # Errors
/// CSV encoding failures.
pub fn ledger_csv(l: &CostLedger) -> Result<String> {
    let users: std::collections::BTreeSet<_> = l
        .upload_units
        .keys()
        .chain(l.download_units.keys())
        .chain(l.user_comparisons.keys())
        .chain(l.report_units.keys())
        .copied()
        .collect();
    let name = l.protocol.map_or("", ProtocolId::name);
    let get =
        |m: &std::collections::BTreeMap<u32, u64>, u| m.get(&u).copied().unwrap_or(0).to_string();
    let mut rows: Vec<Vec<String>> = users
        .into_iter()
        .map(|u| {
            vec![
                name.to_string(),
                l.day.to_string(),
                u.to_string(),
                get(&l.upload_units, u),
                get(&l.download_units, u),
                get(&l.user_comparisons, u),
                get(&l.report_units, u),
            ]
        })
        .collect();
    rows.push(vec![
        name.to_string(),
        l.day.to_string(),
        "server".into(),
        "0".into(),
        "0".into(),
        l.server_comparisons.to_string(),
        "0".into(),
    ]);
    write_csv(
        &[
            "protocol",
            "day",
            "user",
            "upload_units",
            "download_units",
            "user_comparisons",
            "report_units",
        ],
        rows,
    )
}

/// `protocol,subject,metric,value` — one row per leakage column and
/// metric.
///
/// # Errors
/// CSV encoding failures.
pub fn leakage_csv(reports: &[(ProtocolId, &LeakageReport)]) -> Result<String> {
    let mut rows = Vec::new();
    for (p, rep) in reports {
        let mut push = |subject: &str, metric: &str, value: String| {
            rows.push(vec![
                p.name().to_string(),
                subject.to_string(),
                metric.to_string(),
                value,
            ]);
        };
        for col in PRIVACY_COLUMNS {
            if let Some(m) = rep.marks.get(col) {
                push(col, "mark", format!("{m:?}").to_lowercase());
            }
            if let Some(t) = rep.traces.get(col) {
                let n = t.fractions.len().max(1) as f64;
                push(
                    col,
                    "mean_trace_fraction",
                    f6(t.fractions.values().sum::<f64>() / n),
                );
                push(
                    col,
                    "traced_targets",
                    t.fractions
                        .values()
                        .filter(|f| **f > 0.0)
                        .count()
                        .to_string(),
                );
            }
            if let Some(e) = rep.interactions.get(col) {
                push(col, "edges", e.edges.len().to_string());
                push(col, "precision", f6(e.precision));
                push(col, "recall", f6(e.recall));
            }
        }
        push(
            "exposure-status",
            "learned_entries",
            rep.exposure_status.len().to_string(),
        );
        push(
            "patient-identity",
            "users_with_exposure_time",
            rep.exposure_times
                .values()
                .filter(|v| !v.is_empty())
                .count()
                .to_string(),
        );
        if let Some(pr) = &rep.probe {
            push("patient-identity", "probe_success", pr.success.to_string());
            push("patient-identity", "probe_aborted", pr.aborted.to_string());
            push("patient-identity", "probe_queries", pr.queries.to_string());
            push(
                "patient-identity",
                "probe_candidates",
                pr.candidates.to_string(),
            );
        }
    }
    write_csv(&["protocol", "subject", "metric", "value"], rows)
}

/// `protocol,subject,metric,value` — one row per attack and metric.
///
/// # Errors
/// CSV encoding failures.
pub fn attacks_csv(outcomes: &[&AttackOutcome]) -> Result<String> {
    let mut rows = Vec::new();
    for o in outcomes {
        let p = o.protocol.name().to_string();
        let a = o.attack.name().to_string();
        let metrics = [
            ("false_exposures", o.false_exposures.to_string()),
            ("rate_limit_applicable", o.rate_limit_applicable.to_string()),
            ("attacker_flagged", o.attacker_flagged.to_string()),
            ("device_cap_suppressed", o.device_cap_suppressed.to_string()),
            ("cell", format!("{:?}", o.cell).to_lowercase()),
        ];
        for (m, v) in metrics {
            rows.push(vec![p.clone(), a.clone(), m.to_string(), v]);
        }
    }
    write_csv(&["protocol", "subject", "metric", "value"], rows)
}

/// `protocol,table,column,value,source` — every scorecard cell.
///
/// # Errors
/// CSV encoding failures.
pub fn scorecard_csv(sc: &Scorecard) -> Result<String> {
    let mut rows = Vec::new();
    for (p, row) in &sc.rows {
        let src = |k: &str| row.sources.get(k).cloned().unwrap_or_default();
        let mut push = |table: &str, column: &str, value: String, source: String| {
            rows.push(vec![
                p.name().to_string(),
                table.to_string(),
                column.to_string(),
                value,
                source,
            ]);
        };
        for col in PRIVACY_COLUMNS {
            let v = row
                .privacy
                .get(col)
                .map_or("missing".into(), |m| format!("{m:?}").to_lowercase());
            push("privacy", col, v, src("privacy"));
        }
        for (k, v) in &row.utility {
            push("utility", k, v.to_string(), src("privacy"));
        }
        for a in AttackId::SCORED {
            let v = row
                .resilience
                .get(&a)
                .map_or("missing".into(), |c| format!("{c:?}").to_lowercase());
            push(
                "resilience",
                a.name(),
                v,
                src(&format!("resilience:{}", a.name())),
            );
        }
        push(
            "resilience",
            "rate-limit-applicable",
            row.rate_limit_applicable.to_string(),
            String::new(),
        );
        if let Some(c) = &row.cost {
            for col in CostColumn::ALL {
                push("cost", col.name(), c.base.get(col).to_string(), src("cost"));
                if let Some(s) = c.checks.get(&col) {
                    push("cost-check", col.name(), s.name().to_string(), src("cost"));
                }
            }
        }
        for f in Flaw::ALL {
            let v = row
                .flaws
                .get(&f)
                .map_or("unknown".into(), |v| format!("{v:?}").to_lowercase());
            push("flaws", f.name(), v, String::new());
        }
    }
    write_csv(&["protocol", "table", "column", "value", "source"], rows)
}

/// `protocol,table,column,expected,computed`.
///
/// # Errors
/// CSV encoding failures.
pub fn diff_csv(diff: &[DiffEntry]) -> Result<String> {
    write_csv(
        &["protocol", "table", "column", "expected", "computed"],
        diff.iter().map(|d| {
            vec![
                d.protocol.name().to_string(),
                d.table.clone(),
                d.column.clone(),
                d.expected.clone(),
                d.computed.clone(),
            ]
        }),
    )
}

fn table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(
        out,
        "{}",
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  ")
    );
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    let _ = writeln!(out);
}

/// Human-readable aligned tables: privacy (`L` leaks, `P` partial, `-`
/// protected), resiliency (`R`/`M`/`V`), cost at the evaluation point and
/// flaw flags (`X` set, `~` partial, `-` clear, `?` unknown).
pub fn scorecard_text(sc: &Scorecard) -> String {
    let mut out = String::new();
    let hdr = |first: &str, rest: &[&str]| {
        std::iter::once(first.to_string())
            .chain(rest.iter().map(|s| s.to_string()))
            .collect::<Vec<_>>()
    };
    let privacy: Vec<Vec<String>> = sc
        .rows
        .iter()
        .map(|(p, r)| {
            std::iter::once(p.name().to_string())
                .chain(
                    PRIVACY_COLUMNS
                        .iter()
                        .map(|c| r.privacy.get(*c).map_or("?", |m| m.symbol()).to_string()),
                )
                .collect()
        })
        .collect();
    let short = [
        "ES", "PI", "MA-SP", "MA-SA", "MP-UP", "MP-SP", "MP-SA", "P-P", "P-U", "U-U", "U-U-NX",
    ];
    table(&mut out, "Privacy", &hdr("protocol", &short), &privacy);

    let attack_short = [
        "DRIVE",
        "HPB",
        "HPD",
        "SAME",
        "POOL",
        "FWD",
        "TUN",
        "RATE-LIMIT",
    ];
    let res: Vec<Vec<String>> = sc
        .rows
        .iter()
        .map(|(p, r)| {
            std::iter::once(p.name().to_string())
                .chain(
                    AttackId::SCORED
                        .iter()
                        .map(|a| r.resilience.get(a).map_or("?", |c| c.symbol()).to_string()),
                )
                .chain(std::iter::once(
                    if r.rate_limit_applicable { "yes" } else { "no" }.to_string(),
                ))
                .collect()
        })
        .collect();
    table(
        &mut out,
        "Resiliency",
        &hdr("protocol", &attack_short),
        &res,
    );

    let cost_cols: Vec<&str> = CostColumn::ALL.iter().map(|c| c.name()).collect();
    let cost: Vec<Vec<String>> = sc
        .rows
        .iter()
        .map(|(p, r)| {
            std::iter::once(p.name().to_string())
                .chain(CostColumn::ALL.iter().map(|col| match &r.cost {
                    None => "?".to_string(),
                    Some(c) => {
                        let mark = match c.checks.get(col).map(|s| s.name()) {
                            Some("fail") => " !",
                            _ => "",
                        };
                        format!("{}{mark}", c.base.get(*col))
                    }
                }))
                .collect()
        })
        .collect();
    table(
        &mut out,
        "Cost (failed checks marked !)",
        &hdr("protocol", &cost_cols),
        &cost,
    );

    let flaw_cols: Vec<&str> = Flaw::ALL.iter().map(|f| f.name()).collect();
    let flaws: Vec<Vec<String>> = sc
        .rows
        .iter()
        .map(|(p, r)| {
            std::iter::once(p.name().to_string())
                .chain(
                    Flaw::ALL
                        .iter()
                        .map(|f| r.flaws.get(f).map_or("?", |v| v.symbol()).to_string()),
                )
                .collect()
        })
        .collect();
    table(
        &mut out,
        "Design flaws",
        &hdr("protocol", &flaw_cols),
        &flaws,
    );
    out
}

/// Aligned listing of a diff; `no differences` when empty.
pub fn diff_text(diff: &[DiffEntry]) -> String {
    if diff.is_empty() {
        return "no differences\n".into();
    }
    let rows: Vec<Vec<String>> = diff
        .iter()
        .map(|d| {
            vec![
                d.protocol.name().to_string(),
                d.table.clone(),
                d.column.clone(),
                d.expected.clone(),
                d.computed.clone(),
            ]
        })
        .collect();
    let mut out = String::new();
    let header: Vec<String> = ["protocol", "table", "column", "expected", "computed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    table(
        &mut out,
        &format!("{} differing cells", diff.len()),
        &header,
        &rows,
    );
    out
}
