//! Patient reporting and periodic user uploads.

use rand::RngCore;

use super::beacon::{daily_seed, Beacon};
use super::beacon_cache::BeaconCache;
use super::message::{Report, ReportItem, ReportSection, Upload, UploadItem};
use super::spec::{MatcherKind, ProtocolSpec, ReportKind};
use super::time::DayRange;
use super::user::UserState;
use crate::crypto::{blind_pow, ordered_token, randomized_receipt, GroupDesc};
use crate::error::{Error, Result};
use crate::protocols::ProtocolId;

/// Builds the report a diagnosed user submits for `window`.
///
/// * Sent designs report every own beacon of the window (or one daily seed
///   per day).
/// * Received designs report heard beacons, or randomized receipts.
/// * Agreed designs report `g^{xx'}` values.
pub fn patient_report<R: RngCore + ?Sized>(
    spec: &ProtocolSpec,
    group: &GroupDesc,
    user: &UserState,
    window: DayRange,
    cache: &mut BeaconCache,
    rng: &mut R,
) -> Result<Report> {
    if window.len() > crate::framework::time::INFECTIOUS_WINDOW_DAYS {
        return Err(Error::InvalidArgument(
            "infectious window exceeds 14 days".into(),
        ));
    }
    let mut sections = Vec::new();
    for day in window.days() {
        let mut items = Vec::new();
        match spec.report_kind {
            ReportKind::Sent if spec.options.daily_seed => {
                items.push(ReportItem::DailySeed {
                    day,
                    seed: daily_seed(user.seed(), day)?,
                });
            }
            ReportKind::Sent => {
                items.extend(
                    cache
                        .day(spec, group, user, day)?
                        .iter()
                        .map(|b| ReportItem::Sent(*b)),
                );
            }
            ReportKind::Received => {
                for rec in user.encounter_store.iter().filter(|r| r.slot.day() == day) {
                    if spec.options.randomized_receipts {
                        let b = rec.peer.as_group().ok_or_else(|| {
                            Error::Malformed("receipt needs a group beacon".into())
                        })?;
                        let (u, v) = randomized_receipt(group, b, rng)?;
                        items.push(ReportItem::Receipt {
                            u,
                            v,
                            minutes: rec.minutes,
                            slot_hint: rec.slot,
                        });
                    } else {
                        items.push(ReportItem::Received {
                            beacon: rec.peer,
                            minutes: rec.minutes,
                        });
                    }
                }
            }
            ReportKind::Agreed => {
                for rec in user.encounter_store.iter().filter(|r| r.slot.day() == day) {
                    let shared = rec
                        .shared
                        .ok_or_else(|| Error::Malformed("agreed record without token".into()))?;
                    items.push(ReportItem::Agreed {
                        shared,
                        minutes: rec.minutes,
                    });
                }
            }
        }
        sections.push(ReportSection { day, items });
    }
    Ok(Report {
        patient: user.id,
        diagnosis_day: window.last,
        sections,
    })
}

/// The upload a user sends at the end of `day`, if the design has one.
///
/// * Sent-Server: every retained heard beacon.
/// * Received-Server: the user's own beacons of the retention window, as a
///   status query.
/// * Agreed-Server: ordered tokens for the day's new encounter fragments.
/// * Received-Interactive: the day's sent beacons blinded by the user's
///   long-term secret.
/// * Everything else uploads nothing.
pub fn user_periodic_upload(
    spec: &ProtocolSpec,
    group: &GroupDesc,
    user: &UserState,
    day: u32,
    retention_days: u32,
    cache: &mut BeaconCache,
) -> Result<Option<Upload>> {
    let items = match (spec.report_kind, spec.matcher) {
        (ReportKind::Sent, MatcherKind::Server) => user
            .encounter_store
            .iter()
            .map(|r| UploadItem::Received {
                beacon: r.peer,
                minutes: r.minutes,
            })
            .collect(),
        (ReportKind::Received, MatcherKind::Server) => {
            let first = day.saturating_sub(retention_days.saturating_sub(1));
            let mut v = Vec::new();
            for d in first..=day {
                v.extend(
                    cache
                        .day(spec, group, user, d)?
                        .iter()
                        .map(|b| UploadItem::Sent(*b)),
                );
            }
            v
        }
        (ReportKind::Agreed, MatcherKind::Server) => {
            let mut v = Vec::new();
            for r in user.encounter_store.iter().filter(|r| r.slot.day() == day) {
                let (Some(shared), Some(mine), Beacon::Group(theirs)) = (r.shared, r.mine, r.peer)
                else {
                    return Err(Error::Malformed("agreed record without token".into()));
                };
                v.push(UploadItem::OrderedToken {
                    token: ordered_token(&shared, &mine, &theirs)?,
                    minutes: r.minutes,
                });
            }
            v
        }
        (ReportKind::Received, MatcherKind::Interactive)
            if spec.id == ProtocolId::ReceivedInteractive =>
        {
            let s = user
                .blinding_secret
                .ok_or_else(|| Error::InvalidArgument("user has no blinding secret".into()))?;
            let mut v = Vec::new();
            for b in cache.day(spec, group, user, day)? {
                let e = b
                    .as_group()
                    .ok_or_else(|| Error::Malformed("blinding needs a group beacon".into()))?;
                v.push(UploadItem::BlindedSent(blind_pow(e, &s)?));
            }
            v
        }
        _ => return Ok(None),
    };
    Ok(Some(Upload {
        user: user.id,
        day,
        items,
    }))
}
