//! Exposure discovery: one match round per simulated day.
//!
//! A round takes the reports that arrived that day and dispatches to the
//! design's matcher:
//!
//! * **User** matching publishes the patient data (deduplicated and mixed
//!   across patients) and every user matches locally, learning which of her
//!   records matched.
//! * **Server** matching happens on the server; each user receives a single
//!   [`ServerResponse`] holding her aggregate risk.
//! * **Interactive** matching runs the design's sub-protocol; the user
//!   learns an aggregate only.
//!
//! Users diagnosed on or before the round's day take no part.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::RngCore;
use serde::Serialize;

use super::beacon::{daily_seed, prf_beacon, Beacon, UserId};
use super::beacon_cache::BeaconCache;
use super::message::{Report, ReportItem, UploadItem};
use super::server::ServerState;
use super::spec::{MatcherKind, ProtocolSpec, ReportKind};
use super::time::{TimeSlot, SLOTS_PER_DAY};
use super::user::{secret_for_slot, UserState};
use crate::crypto::{
    cuckoo_build, cuckoo_query, ordered_token, receipt_matches, Digest, GroupDesc, GroupElement,
    DEFAULT_FP_TARGET,
};
use crate::error::{Error, Result};
use crate::protocols::desire::{desire_query, reported_token_index, DesireQuery};
use crate::protocols::psi_ca::{PsiCaClient, PsiCaServer};
use crate::protocols::ri_psi::{user_reblind, RiPsiPublication};
use crate::protocols::sdh::{sdh_match, stored_token_index};

/// Everything a user receives from a server-matching round.
///
/// The structure deliberately has a single field: the server reveals the
/// aggregate risk and nothing else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ServerResponse {
    /// Aggregate exposure in minutes.
    pub risk_minutes: u64,
}

/// One locally matched record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalMatch {
    /// Slot of the matched record.
    pub slot: TimeSlot,
    /// Minutes of the matched record.
    pub minutes: u32,
}

/// What a user learns in one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum UserOutput {
    /// Server matching: one number.
    Server(ServerResponse),
    /// User matching: the matched records themselves.
    Local(Vec<LocalMatch>),
    /// Interactive matching: an aggregate plus protocol side information.
    Interactive {
        /// Aggregate exposure in minutes.
        risk_minutes: u64,
        /// Per-patient batch sizes, where the protocol reveals them.
        per_patient_counts: Vec<usize>,
    },
}

impl UserOutput {
    /// Aggregate risk in minutes.
    pub fn risk_minutes(&self) -> u64 {
        match self {
            UserOutput::Server(r) => r.risk_minutes,
            UserOutput::Local(v) => v.iter().map(|m| u64::from(m.minutes)).sum(),
            UserOutput::Interactive { risk_minutes, .. } => *risk_minutes,
        }
    }

    /// Slots the user can attribute the exposure to.
    pub fn matched_slots(&self) -> Vec<TimeSlot> {
        match self {
            UserOutput::Local(v) => v.iter().map(|m| m.slot).collect(),
            _ => Vec::new(),
        }
    }
}

/// Outcome of the server-side rate-limit check for one round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RateLimitOutcome {
    /// Whether the server can observe per-patient counts at all.
    pub applicable: bool,
    /// Patients whose counts exceeded a cap.
    pub flagged: BTreeSet<UserId>,
}

/// Work done in one round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundCost {
    /// Token units each participating user downloaded.
    pub download_units: BTreeMap<UserId, u64>,
    /// Token units each user uploaded during the interaction.
    pub query_upload_units: BTreeMap<UserId, u64>,
    /// Naive comparison count per user.
    pub user_comparisons: BTreeMap<UserId, u64>,
    /// Naive server comparison count.
    pub server_comparisons: u64,
    /// Group exponentiations performed.
    pub exponentiations: u64,
}

/// What an honest-but-curious server sees during the round, beyond what it
/// stores.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ServerRoundView {
    /// Per-user aggregate risk, where the server computes it.
    pub learned_risk: BTreeMap<UserId, u64>,
    /// Users the server saw matched to each patient.
    pub patient_matches: BTreeMap<UserId, BTreeSet<UserId>>,
    /// Query tokens received (agreed-interactive queries), even if the
    /// honest policy discards them afterwards.
    pub query_tokens: Vec<(UserId, Digest)>,
}

/// Result of one round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundOutcome {
    /// Output per participating user.
    pub outputs: BTreeMap<UserId, UserOutput>,
    /// Work counters.
    pub cost: RoundCost,
    /// Rate-limit evidence.
    pub rate_limit: RateLimitOutcome,
    /// Server-side observations.
    pub server_view: ServerRoundView,
    /// Set if the interaction failed; then `outputs` is empty.
    pub aborted: Option<String>,
}

/// Fixed inputs of a round.
#[derive(Clone, Copy, Debug)]
pub struct MatchContext<'a> {
    /// The design.
    pub spec: &'a ProtocolSpec,
    /// Group for group-based designs.
    pub group: &'a GroupDesc,
    /// Day of the round.
    pub day: u32,
    /// Retention window in days.
    pub retention_days: u32,
    /// Server caps.
    pub per_report_size_cap: u32,
    /// Server cap on users exposed in one slot by one patient.
    pub per_patient_exposure_cap: u32,
}

/// Runs one match round over `new_reports`.
///
/// Only active users not yet diagnosed take part. On an interaction failure the round
/// is aborted: `aborted` is set, no user output is produced and the server
/// state is left unchanged.
pub fn match_round<R: RngCore + ?Sized>(
    ctx: &MatchContext<'_>,
    server: &mut ServerState,
    users: &[UserState],
    new_reports: &[Report],
    cache: &mut BeaconCache,
    rng: &mut R,
) -> Result<RoundOutcome> {
    let eligible: Vec<&UserState> = users
        .iter()
        .filter(|u| u.active && !u.is_patient_by(ctx.day))
        .collect();
    let mut out = RoundOutcome::default();
    report_size_rate_limit(ctx, new_reports, &mut out.rate_limit);
    let reports: Vec<&Report> = new_reports.iter().collect();
    let result = match (ctx.spec.report_kind, ctx.spec.matcher) {
        (ReportKind::Sent, MatcherKind::User) => sent_user(ctx, &eligible, &reports, &mut out),
        (ReportKind::Sent, MatcherKind::Interactive) => {
            sent_interactive(ctx, &eligible, &reports, &mut out, rng)
        }
        (ReportKind::Sent, MatcherKind::Server) => {
            sent_server(ctx, server, &eligible, &reports, &mut out)
        }
        (ReportKind::Received, MatcherKind::User) if ctx.spec.options.randomized_receipts => {
            received_receipts(ctx, &eligible, &reports, &mut out)
        }
        (ReportKind::Received, MatcherKind::User) => {
            received_user(ctx, &eligible, &reports, cache, &mut out)
        }
        (ReportKind::Received, MatcherKind::Interactive) => {
            received_interactive(ctx, server, &eligible, &reports, &mut out, rng)
        }
        (ReportKind::Received, MatcherKind::Server) => {
            received_server(server, &eligible, &reports, &mut out)
        }
        (ReportKind::Agreed, MatcherKind::User) => agreed_user(&eligible, &reports, &mut out),
        (ReportKind::Agreed, MatcherKind::Interactive) => {
            agreed_interactive(ctx, server, &eligible, &reports, &mut out)
        }
        (ReportKind::Agreed, MatcherKind::Server) => {
            agreed_server(ctx, server, &eligible, &reports, &mut out)
        }
    };
    match result {
        Ok(()) => Ok(out),
        Err(Error::Aborted(msg)) => Ok(RoundOutcome {
            aborted: Some(msg),
            rate_limit: out.rate_limit,
            ..RoundOutcome::default()
        }),
        Err(e) => Err(e),
    }
}

/// Report-size rate limit, available wherever patients report one item
/// per encounter (Received and Agreed designs).
fn report_size_rate_limit(ctx: &MatchContext<'_>, reports: &[Report], rl: &mut RateLimitOutcome) {
    match ctx.spec.report_kind {
        ReportKind::Received | ReportKind::Agreed => {
            rl.applicable = true;
            for r in reports {
                if r.sections
                    .iter()
                    .any(|s| s.items.len() > ctx.per_report_size_cap as usize)
                {
                    rl.flagged.insert(r.patient);
                }
            }
        }
        ReportKind::Sent => {
            rl.applicable = ctx.spec.matcher == MatcherKind::Server;
        }
    }
}

fn sent_user(
    ctx: &MatchContext<'_>,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
) -> Result<()> {
    let mut published: HashSet<Beacon> = HashSet::new();
    let mut download = 0u64;
    let mut filter = None;
    if ctx.spec.options.daily_seed {
        let mut seeds = Vec::new();
        for r in reports {
            for (_, item) in r.items() {
                if let ReportItem::DailySeed { day, seed } = item {
                    seeds.push((*day, *seed));
                }
            }
        }
        seeds.sort();
        seeds.dedup();
        for (day, seed) in &seeds {
            for t in TimeSlot::of_day(*day) {
                published.insert(Beacon::Prf(prf_beacon(seed.as_bytes(), t)?));
            }
        }
        if ctx.spec.options.cuckoo {
            let digests: Vec<Digest> = published
                .iter()
                .filter_map(|b| b.as_digest().copied())
                .collect();
            let f = cuckoo_build(digests.iter(), DEFAULT_FP_TARGET)?;
            download = f.len() as u64;
            filter = Some(f);
        } else {
            download = seeds.len() as u64;
        }
    } else {
        for r in reports {
            for (_, item) in r.items() {
                if let ReportItem::Sent(b) = item {
                    published.insert(*b);
                }
            }
        }
        download = download.max(published.len() as u64);
    }
    let n_published = published.len() as u64;
    for u in users {
        let mut matches = Vec::new();
        for rec in &u.encounter_store {
            let hit = match (&filter, rec.peer) {
                (Some(f), Beacon::Prf(d)) => cuckoo_query(f, &d),
                _ => published.contains(&rec.peer),
            };
            if hit {
                matches.push(LocalMatch {
                    slot: rec.slot,
                    minutes: rec.minutes,
                });
            }
        }
        out.cost.download_units.insert(u.id, download);
        out.cost
            .user_comparisons
            .insert(u.id, u.encounter_store.len() as u64 * n_published);
        out.outputs.insert(u.id, UserOutput::Local(matches));
    }
    Ok(())
}

fn sent_interactive<R: RngCore + ?Sized>(
    ctx: &MatchContext<'_>,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
    rng: &mut R,
) -> Result<()> {
    if reports.is_empty() {
        return Ok(());
    }
    let mut items: Vec<Vec<u8>> = Vec::new();
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Sent(b) = item {
                items.push(b.encode());
            }
        }
    }
    let server = PsiCaServer::new(ctx.group, &items, rng)?;
    out.cost.exponentiations += server.published().len() as u64;
    let published: HashSet<GroupElement> = server.published().iter().copied().collect();
    for u in users {
        let mut by_minutes: BTreeMap<u32, Vec<Vec<u8>>> = BTreeMap::new();
        for rec in &u.encounter_store {
            by_minutes
                .entry(rec.minutes)
                .or_default()
                .push(rec.peer.encode());
        }
        let mut risk = 0u64;
        let mut down = published.len() as u64;
        let mut up = 0u64;
        for (minutes, group_items) in &by_minutes {
            let (client, query) = PsiCaClient::query(ctx.group, group_items, rng)?;
            let response = server.respond(ctx.group, &query, rng)?;
            risk += u64::from(*minutes) * client.finish(ctx.group, &response, &published)?;
            up += query.len() as u64;
            down += response.len() as u64;
            out.cost.exponentiations += 3 * query.len() as u64;
        }
        out.cost.download_units.insert(u.id, down);
        out.cost.query_upload_units.insert(u.id, up);
        out.cost.user_comparisons.insert(u.id, up);
        out.outputs.insert(
            u.id,
            UserOutput::Interactive {
                risk_minutes: risk,
                per_patient_counts: Vec::new(),
            },
        );
    }
    Ok(())
}

fn sent_server(
    ctx: &MatchContext<'_>,
    server: &ServerState,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
) -> Result<()> {
    let mut reported: HashMap<Beacon, UserId> = HashMap::new();
    let mut reported_items = 0u64;
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Sent(b) = item {
                reported.insert(*b, r.patient);
                reported_items += 1;
            }
        }
    }
    let mut per_beacon_users: HashMap<Beacon, BTreeSet<UserId>> = HashMap::new();
    for u in users {
        let mut risk = 0u64;
        let stored = server
            .uploaded_user_tokens
            .get(&u.id)
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        for s in stored {
            if let UploadItem::Received { beacon, minutes } = s.item {
                if let Some(p) = reported.get(&beacon) {
                    risk += u64::from(minutes);
                    per_beacon_users.entry(beacon).or_default().insert(u.id);
                    out.server_view
                        .patient_matches
                        .entry(*p)
                        .or_default()
                        .insert(u.id);
                }
            }
        }
        out.cost.server_comparisons += stored.len() as u64 * reported_items;
        if !reports.is_empty() {
            out.server_view.learned_risk.insert(u.id, risk);
        }
        out.outputs.insert(
            u.id,
            UserOutput::Server(ServerResponse { risk_minutes: risk }),
        );
    }
    for (b, us) in &per_beacon_users {
        if us.len() > ctx.per_patient_exposure_cap as usize {
            out.rate_limit.flagged.insert(reported[b]);
        }
    }
    Ok(())
}

fn received_user(
    ctx: &MatchContext<'_>,
    users: &[&UserState],
    reports: &[&Report],
    cache: &mut BeaconCache,
    out: &mut RoundOutcome,
) -> Result<()> {
    // Merge all patients' data and collapse duplicates.
    let mut published: HashMap<Beacon, u64> = HashMap::new();
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Received { beacon, minutes } = item {
                *published.entry(*beacon).or_insert(0) += u64::from(*minutes);
            }
        }
    }
    let first = ctx.day.saturating_sub(ctx.retention_days.saturating_sub(1));
    for u in users {
        let mut matches = Vec::new();
        if !published.is_empty() {
            for d in first..=ctx.day {
                let base = TimeSlot::first_of_day(d).0;
                for (i, b) in cache.day(ctx.spec, ctx.group, u, d)?.iter().enumerate() {
                    if let Some(m) = published.get(b) {
                        matches.push(LocalMatch {
                            slot: TimeSlot(base + i as u32),
                            minutes: *m as u32,
                        });
                    }
                }
            }
        }
        let own = u64::from(ctx.day - first + 1) * u64::from(SLOTS_PER_DAY);
        out.cost.download_units.insert(u.id, published.len() as u64);
        out.cost
            .user_comparisons
            .insert(u.id, own * published.len() as u64);
        out.outputs.insert(u.id, UserOutput::Local(matches));
    }
    Ok(())
}

/// Checks a receipt against the holder's secret for the hinted slot only.
fn receipt_hinted(
    group: &GroupDesc,
    user: &UserState,
    u: &GroupElement,
    v: &GroupElement,
    slot: TimeSlot,
) -> Result<bool> {
    let x = secret_for_slot(group, user, slot)?;
    receipt_matches(&(*u, *v), &x)
}

/// Checks a receipt against every slot of the retention window; returns
/// the matching slot. Equivalent to the hinted check except with
/// negligible probability in the strong group.
pub fn receipt_exhaustive(
    group: &GroupDesc,
    user: &UserState,
    receipt: &(GroupElement, GroupElement),
    first_day: u32,
    last_day: u32,
) -> Result<Option<TimeSlot>> {
    for d in first_day..=last_day {
        for t in TimeSlot::of_day(d) {
            if receipt_matches(receipt, &secret_for_slot(group, user, t)?)? {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}

fn received_receipts(
    ctx: &MatchContext<'_>,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
) -> Result<()> {
    let mut receipts = Vec::new();
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Receipt {
                u,
                v,
                minutes,
                slot_hint,
            } = item
            {
                receipts.push((*u, *v, *minutes, *slot_hint));
            }
        }
    }
    // Mixed across patients: order by encoding.
    receipts.sort_by_key(|a| (a.0, a.1));
    let first = ctx.day.saturating_sub(ctx.retention_days.saturating_sub(1));
    for user in users {
        let mut matches = Vec::new();
        for (u, v, minutes, hint) in &receipts {
            if hint.day() < first || hint.day() > ctx.day {
                continue;
            }
            out.cost.exponentiations += 1;
            if receipt_hinted(ctx.group, user, u, v, *hint)? {
                matches.push(LocalMatch {
                    slot: *hint,
                    minutes: *minutes,
                });
            }
        }
        let own = u64::from(ctx.day - first + 1) * u64::from(SLOTS_PER_DAY);
        out.cost
            .download_units
            .insert(user.id, receipts.len() as u64);
        out.cost
            .user_comparisons
            .insert(user.id, own * receipts.len() as u64);
        out.outputs.insert(user.id, UserOutput::Local(matches));
    }
    Ok(())
}

fn received_interactive<R: RngCore + ?Sized>(
    ctx: &MatchContext<'_>,
    server: &ServerState,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
    rng: &mut R,
) -> Result<()> {
    if reports.is_empty() {
        return Ok(());
    }
    let publication = RiPsiPublication::new(ctx.group, reports, rng)?;
    out.cost.exponentiations += publication.len() as u64;
    let mut results = Vec::new();
    for u in users {
        let secret = u
            .blinding_secret
            .ok_or_else(|| Error::InvalidArgument("user has no blinding secret".into()))?;
        let stored: HashSet<GroupElement> = server
            .uploaded_user_tokens
            .get(&u.id)
            .into_iter()
            .flatten()
            .filter_map(|s| match s.item {
                UploadItem::BlindedSent(e) => Some(e),
                _ => None,
            })
            .collect();
        let (reupload, view) = user_reblind(u.id, &secret, &publication, rng)?;
        let risk = publication.server_match(ctx.group, &reupload, &stored)?;
        out.cost.exponentiations += 2 * reupload.len() as u64;
        out.cost.server_comparisons += reupload.len() as u64 * stored.len() as u64;
        results.push((u.id, risk, view, reupload.len() as u64));
    }
    for (id, risk, view, n) in results {
        out.cost.download_units.insert(id, publication.len() as u64);
        out.cost.query_upload_units.insert(id, n);
        out.cost.user_comparisons.insert(id, n);
        out.server_view.learned_risk.insert(id, risk);
        out.outputs.insert(
            id,
            UserOutput::Interactive {
                risk_minutes: risk,
                per_patient_counts: view.per_patient_counts,
            },
        );
    }
    Ok(())
}

fn received_server(
    server: &ServerState,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
) -> Result<()> {
    let mut reported: HashMap<Beacon, Vec<(UserId, u32)>> = HashMap::new();
    let mut reported_items = 0u64;
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Received { beacon, minutes } = item {
                reported
                    .entry(*beacon)
                    .or_default()
                    .push((r.patient, *minutes));
                reported_items += 1;
            }
        }
    }
    for u in users {
        let mut risk = 0u64;
        let stored = server
            .uploaded_user_tokens
            .get(&u.id)
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        for s in stored {
            if let UploadItem::Sent(b) = s.item {
                for (p, m) in reported.get(&b).into_iter().flatten() {
                    risk += u64::from(*m);
                    out.server_view
                        .patient_matches
                        .entry(*p)
                        .or_default()
                        .insert(u.id);
                }
            }
        }
        out.cost.server_comparisons += stored.len() as u64 * reported_items;
        if !reports.is_empty() {
            out.server_view.learned_risk.insert(u.id, risk);
        }
        out.outputs.insert(
            u.id,
            UserOutput::Server(ServerResponse { risk_minutes: risk }),
        );
    }
    Ok(())
}

fn agreed_user(users: &[&UserState], reports: &[&Report], out: &mut RoundOutcome) -> Result<()> {
    let mut published: HashSet<GroupElement> = HashSet::new();
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Agreed { shared, .. } = item {
                published.insert(*shared);
            }
        }
    }
    for u in users {
        let matches: Vec<LocalMatch> = u
            .encounter_store
            .iter()
            .filter(|rec| rec.shared.is_some_and(|s| published.contains(&s)))
            .map(|rec| LocalMatch {
                slot: rec.slot,
                minutes: rec.minutes,
            })
            .collect();
        out.cost.download_units.insert(u.id, published.len() as u64);
        out.cost.user_comparisons.insert(
            u.id,
            u.encounter_store.len() as u64 * published.len() as u64,
        );
        out.outputs.insert(u.id, UserOutput::Local(matches));
    }
    Ok(())
}

/// The ordered tokens a user sends in an agreed-interactive query: one per
/// retained encounter record.
pub fn query_tokens(user: &UserState) -> Result<Vec<(Digest, u32)>> {
    user.encounter_store
        .iter()
        .map(|rec| {
            let (Some(shared), Some(mine), Beacon::Group(theirs)) =
                (rec.shared, rec.mine, rec.peer)
            else {
                return Err(Error::Malformed("agreed record without token".into()));
            };
            Ok((ordered_token(&shared, &mine, &theirs)?, rec.minutes))
        })
        .collect()
}

fn agreed_interactive(
    ctx: &MatchContext<'_>,
    server: &mut ServerState,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
) -> Result<()> {
    if reports.is_empty() {
        return Ok(());
    }
    let (index, rejected) = reported_token_index(ctx.group, reports);
    server.rejected_report_items += rejected;
    let indexed: u64 = reports
        .iter()
        .map(|r| {
            r.items()
                .filter(|(_, it)| matches!(it, ReportItem::Agreed { .. }))
                .count() as u64
        })
        .sum();
    let owner: HashMap<Digest, UserId> = reports
        .iter()
        .flat_map(|r| {
            r.items().filter_map(move |(_, it)| match it {
                ReportItem::Agreed { shared, .. } => Some((*shared, r.patient)),
                _ => None,
            })
        })
        .flat_map(|(s, p)| {
            crate::crypto::ordered_token_pair(&s)
                .into_iter()
                .map(move |d| (d, p))
        })
        .collect();
    for u in users {
        let tokens = query_tokens(u)?;
        let q = DesireQuery {
            user: u.id,
            day: ctx.day,
            tokens,
        };
        for (d, _) in &q.tokens {
            out.server_view.query_tokens.push((u.id, *d));
            if let Some(p) = owner.get(d) {
                out.server_view
                    .patient_matches
                    .entry(*p)
                    .or_default()
                    .insert(u.id);
            }
        }
        let risk = desire_query(server, &index, &q)?;
        out.cost
            .query_upload_units
            .insert(u.id, q.tokens.len() as u64);
        out.cost.server_comparisons += q.tokens.len() as u64 * indexed;
        out.server_view.learned_risk.insert(u.id, risk);
        out.outputs.insert(
            u.id,
            UserOutput::Interactive {
                risk_minutes: risk,
                per_patient_counts: Vec::new(),
            },
        );
    }
    Ok(())
}

fn agreed_server(
    ctx: &MatchContext<'_>,
    server: &mut ServerState,
    users: &[&UserState],
    reports: &[&Report],
    out: &mut RoundOutcome,
) -> Result<()> {
    let index = stored_token_index(server);
    let stored_total: usize = index.values().map(Vec::len).sum();
    let mut per_user: BTreeMap<UserId, u64> = BTreeMap::new();
    for r in reports {
        let m = sdh_match(ctx.group, &index, r);
        server.rejected_report_items += m.rejected;
        out.cost.server_comparisons += r.units() as u64 * stored_total as u64;
        for (u, minutes) in m.per_user {
            *per_user.entry(u).or_insert(0) += minutes;
            out.server_view
                .patient_matches
                .entry(r.patient)
                .or_default()
                .insert(u);
        }
    }
    for u in users {
        let risk = per_user.get(&u.id).copied().unwrap_or(0);
        if !reports.is_empty() {
            out.server_view.learned_risk.insert(u.id, risk);
        }
        out.outputs.insert(
            u.id,
            UserOutput::Server(ServerResponse { risk_minutes: risk }),
        );
    }
    // Patients exposed by a patient report only count towards eligible users.
    let eligible: HashSet<UserId> = users.iter().map(|u| u.id).collect();
    for set in out.server_view.patient_matches.values_mut() {
        set.retain(|u| eligible.contains(u));
    }
    Ok(())
}

/// The 144 beacons of `day` regenerated from a holder seed through the
/// day's seed `s_d`, as a user does with a reported daily seed.
pub fn expand_daily_seed(seed: &[u8], day: u32) -> Result<Vec<Beacon>> {
    let sd = daily_seed(seed, day)?;
    TimeSlot::of_day(day)
        .map(|t| Ok(Beacon::Prf(prf_beacon(sd.as_bytes(), t)?)))
        .collect()
}
