//! Leakage oracles: concrete linking procedures run against adversary views
//! and scored against the world's ground truth.
//!
//! * **Movement traces** — every key an adversary can attribute to a holder
//!   (a patient's report, a user's upload, a registry entry, a published
//!   daily seed) is looked up among located observations. A holder's chain
//!   counts only with at least two points; a point is correct when the
//!   holder really was in that cell in that slot.
//! * **Interactions** — keys shared between holders become inferred
//!   co-location edges, scored by precision against cell co-presence.
//! * **Exposure status** — whether the server learns a user's risk.
//! * **Exposure time / patient identity** — whether a user can pin her
//!   exposure to a slot, directly (local matching) or through an adaptive
//!   subset probe against an interactive matcher.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::AdversaryKind;
use super::views::{adversary_view, person_beacons, AdversaryView, PrivacyRun, ServerSnapshot};
use crate::crypto::{dh_shared, ordered_token_pair, receipt_matches, GroupDesc, GroupElement};
use crate::error::{Error, Result};
use crate::framework::{
    beacon_for_slot, prf_beacon, query_tokens, secret_for_slot, Beacon, MatcherKind,
    QueryStorePolicy, RateLimitConfig, Report, ReportItem, ReportKind, ServerState, TimeSlot,
    UploadItem, UserId,
};
use crate::protocols::desire::{desire_query, reported_token_index, DesireQuery};
use crate::protocols::psi_ca::{PsiCaClient, PsiCaServer};
use crate::protocols::ri_psi::{user_reblind, RiPsiPublication};
use crate::protocols::{instantiate, ProtocolId};
use crate::simulation::split_minutes;

/// Three-valued privacy outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    /// The information is obtained.
    Leaks,
    /// Obtained only through a costly probe.
    Partial,
    /// Not obtained.
    Protected,
}

impl Mark {
    /// One-letter symbol.
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Leaks => "L",
            Mark::Partial => "P",
            Mark::Protected => "-",
        }
    }
}

/// Who a server-side item is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Holder {
    /// A user's upload, query or registry entry.
    User(UserId),
    /// A patient's report.
    Patient(UserId),
}

/// One attributable key.
#[derive(Clone, Debug, PartialEq, Eq)]
struct KItem {
    holder: Holder,
    key: Vec<u8>,
    slot: Option<TimeSlot>,
}

/// Outcome of a trace-linking procedure.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TraceResult {
    /// Per-target fraction of observable points correctly linked.
    pub fractions: BTreeMap<UserId, f64>,
    /// Derived mark.
    pub mark: Option<Mark>,
}

impl TraceResult {
    fn mark(&self) -> Mark {
        self.mark.unwrap_or(Mark::Protected)
    }
}

/// Inferred co-location edges of one kind.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EdgeResult {
    /// `(x, y, slot)` edges.
    pub edges: BTreeSet<(UserId, UserId, TimeSlot)>,
    /// Edges whose endpoints really shared a cell in that slot.
    pub correct: usize,
    /// `correct / edges`.
    pub precision: f64,
    /// Share of ground-truth encounter pairs among the edges.
    pub recall: f64,
}

impl EdgeResult {
    /// Minimum precision for an edge set to count as a leak.
    pub const PRECISION_BAR: f64 = 0.9;

    /// Leaks when at least one edge is inferred with high precision.
    pub fn mark(&self) -> Mark {
        if !self.edges.is_empty() && self.precision >= Self::PRECISION_BAR {
            Mark::Leaks
        } else {
            Mark::Protected
        }
    }
}

/// Outcome of the exposure-time probe against an interactive matcher.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProbeOutcome {
    /// Whether the matching record was isolated.
    pub success: bool,
    /// Whether the server aborted the probe.
    pub aborted: bool,
    /// Queries issued.
    pub queries: u32,
    /// Records the probe started from.
    pub candidates: usize,
}

/// Full leakage analysis of one design.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LeakageReport {
    /// Design.
    pub protocol: Option<ProtocolId>,
    /// Trace fractions by column name.
    pub traces: BTreeMap<String, TraceResult>,
    /// Edges by column name.
    pub interactions: BTreeMap<String, EdgeResult>,
    /// Recovered exposure slots per user (local matching).
    pub exposure_times: BTreeMap<UserId, Vec<TimeSlot>>,
    /// Probe against interactive matchers.
    pub probe: Option<ProbeOutcome>,
    /// Risk learned by the server per `(user, day)`.
    #[serde(serialize_with = "crate::simulation::serialize_pair_map")]
    pub exposure_status: BTreeMap<(UserId, u32), u64>,
    /// Marks by column name.
    pub marks: BTreeMap<String, Mark>,
}

/// Privacy columns in table order.
pub const PRIVACY_COLUMNS: [&str; 11] = [
    "exposure-status",
    "patient-identity",
    "trace-all-server-psv",
    "trace-all-server-asv",
    "trace-patient-user-psv",
    "trace-patient-server-psv",
    "trace-patient-server-asv",
    "patient-patient",
    "patient-user",
    "user-user",
    "user-user-no-exposure",
];

fn hex_decode(s: &str) -> Result<Vec<u8>> {
    (0..s.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(s.get(i..i + 2).unwrap_or("zz"), 16)
                .map_err(|e| Error::Malformed(e.to_string()))
        })
        .collect()
}

fn agreed_keys(shared: &GroupElement) -> Vec<Vec<u8>> {
    let mut v = vec![shared.encode()];
    v.extend(
        ordered_token_pair(shared)
            .iter()
            .map(|d| d.as_bytes().to_vec()),
    );
    v
}

/// A patient receipt as the server stores it: patient, day, `(g^y, b^y)`.
type StoredReceipt = (UserId, u32, GroupElement, GroupElement);

/// Everything the server can attribute to a holder, plus patient receipts.
fn server_items(snap: &ServerSnapshot) -> Result<(Vec<KItem>, Vec<StoredReceipt>)> {
    let mut items = Vec::new();
    let mut receipts = Vec::new();
    for r in &snap.reports {
        let holder = Holder::Patient(r.patient);
        for (day, item) in r.items() {
            match item {
                ReportItem::Sent(b) => items.push(KItem {
                    holder,
                    key: b.encode(),
                    slot: None,
                }),
                ReportItem::DailySeed { day, seed } => {
                    for t in TimeSlot::of_day(*day) {
                        let b = prf_beacon(seed.as_bytes(), t)?;
                        items.push(KItem {
                            holder,
                            key: b.as_bytes().to_vec(),
                            slot: Some(t),
                        });
                    }
                }
                ReportItem::Received { beacon, .. } => items.push(KItem {
                    holder,
                    key: beacon.encode(),
                    slot: None,
                }),
                ReportItem::Receipt { u, v, .. } => receipts.push((r.patient, day, *u, *v)),
                ReportItem::Agreed { shared, .. } => {
                    items.extend(agreed_keys(shared).into_iter().map(|key| KItem {
                        holder,
                        key,
                        slot: None,
                    }));
                }
            }
        }
    }
    for up in &snap.uploads {
        let holder = Holder::User(up.user);
        for item in &up.items {
            let key = match item {
                UploadItem::Received { beacon, .. } | UploadItem::Sent(beacon) => beacon.encode(),
                UploadItem::OrderedToken { token, .. } => token.as_bytes().to_vec(),
                UploadItem::BlindedSent(_) => continue,
            };
            items.push(KItem {
                holder,
                key,
                slot: None,
            });
        }
    }
    for (hex, e) in &snap.registry {
        items.push(KItem {
            holder: Holder::User(e.user),
            key: hex_decode(hex)?,
            slot: Some(e.slot),
        });
    }
    for (u, _, d) in &snap.query_tokens {
        items.push(KItem {
            holder: Holder::User(*u),
            key: d.as_bytes().to_vec(),
            slot: None,
        });
    }
    Ok((items, receipts))
}

/// Observation index of a view: key → located points.
fn observation_index(view: &AdversaryView) -> HashMap<&[u8], Vec<(u32, TimeSlot)>> {
    let mut idx: HashMap<&[u8], Vec<(u32, TimeSlot)>> = HashMap::new();
    for o in &view.observed {
        idx.entry(o.key.as_slice())
            .or_default()
            .push((o.cell, o.slot));
    }
    idx
}

/// Scores chains of points against presence.
fn score_chains(
    run: &PrivacyRun,
    chains: &BTreeMap<UserId, BTreeSet<(u32, TimeSlot)>>,
    targets: &BTreeSet<UserId>,
) -> TraceResult {
    let mut observable: BTreeMap<UserId, u64> = BTreeMap::new();
    for ((u, _), cell) in &run.presence {
        if targets.contains(u) && run.sniffer_cells.contains(cell) {
            *observable.entry(*u).or_insert(0) += 1;
        }
    }
    let mut res = TraceResult::default();
    for t in targets {
        let correct = chains.get(t).filter(|c| c.len() >= 2).map_or(0, |c| {
            c.iter()
                .filter(|(cell, slot)| run.presence.get(&(*t, slot.0)) == Some(cell))
                .count()
        });
        let denom = observable.get(t).copied().unwrap_or(0);
        res.fractions.insert(
            *t,
            if denom == 0 {
                0.0
            } else {
                correct as f64 / denom as f64
            },
        );
    }
    res.mark = Some(if res.fractions.values().any(|f| *f > 0.0) {
        Mark::Leaks
    } else {
        Mark::Protected
    });
    res
}

/// Server-side trace linking for holders of one class.
fn server_trace(run: &PrivacyRun, view: &AdversaryView, patients: bool) -> Result<TraceResult> {
    let snap = view
        .server_side
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("server view required".into()))?;
    let (items, receipts) = server_items(snap)?;
    let idx = observation_index(view);
    let mut chains: BTreeMap<UserId, BTreeSet<(u32, TimeSlot)>> = BTreeMap::new();
    for it in &items {
        let owner = match (it.holder, patients) {
            (Holder::Patient(p), true) => p,
            (Holder::User(u), false) => u,
            _ => continue,
        };
        for point in idx.get(it.key.as_slice()).into_iter().flatten() {
            chains.entry(owner).or_default().insert(*point);
        }
    }
    if patients && !view.own_secrets.is_empty() {
        // Receipt test with the devices' secrets of the same day.
        for (p, day, u, v) in &receipts {
            for s in view.own_secrets.iter().filter(|s| s.slot.day() == *day) {
                if receipt_matches(&(*u, *v), &s.secret)? {
                    chains.entry(*p).or_default().insert((s.cell, s.slot));
                }
            }
        }
    }
    let targets: BTreeSet<UserId> = if patients {
        run.patients()
    } else {
        (0..run.real_users).collect()
    };
    Ok(score_chains(run, &chains, &targets))
}

/// User-side trace linking of patients: only published daily seeds group
/// beacons together.
fn user_trace(run: &PrivacyRun, view: &AdversaryView) -> Result<TraceResult> {
    let published = view
        .published
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("user view required".into()))?;
    let idx = observation_index(view);
    // Ground-truth owner of every published seed, for scoring only.
    let mut owner = HashMap::new();
    for t in &run.result.transcripts {
        for r in &t.reports {
            for (_, item) in r.items() {
                if let ReportItem::DailySeed { seed, .. } = item {
                    owner.insert(*seed, r.patient);
                }
            }
        }
    }
    let mut chains: BTreeMap<UserId, BTreeSet<(u32, TimeSlot)>> = BTreeMap::new();
    for (_, seed) in &published.daily_seeds {
        let Some(p) = owner.get(seed) else { continue };
        // Every slot of every day is tried: the seed does not reveal its day.
        let mut group_points = BTreeSet::new();
        for day in 0..run.scenario.num_days {
            for t in TimeSlot::of_day(day) {
                let b = prf_beacon(seed.as_bytes(), t)?;
                for point in idx.get(b.as_bytes().as_slice()).into_iter().flatten() {
                    group_points.insert(*point);
                }
            }
        }
        if group_points.len() >= 2 {
            chains.entry(*p).or_default().extend(group_points);
        }
    }
    Ok(score_chains(run, &chains, &run.patients()))
}

/// Ground-truth slot of every beacon and agreed key of the run.
fn key_slots(run: &PrivacyRun) -> Result<HashMap<Vec<u8>, TimeSlot>> {
    let spec = instantiate(run.protocol);
    let group = GroupDesc::of_kind(run.scenario.group_kind);
    let mut m = HashMap::new();
    for (_, slot, b) in person_beacons(run)? {
        m.insert(b.encode(), slot);
    }
    for (d, _) in &run.devices {
        for slot in &run.device_slots {
            m.insert(
                beacon_for_slot(&spec, &group, &run.result.users[*d as usize], *slot)?.encode(),
                *slot,
            );
        }
    }
    if spec.report_kind == ReportKind::Agreed {
        for e in &run.result.world.encounters {
            for (slot, _) in split_minutes(e.start_minute, e.minutes) {
                let x = secret_for_slot(&group, &run.result.users[e.a as usize], slot)?;
                let theirs = beacon_for_slot(&spec, &group, &run.result.users[e.b as usize], slot)?;
                let Beacon::Group(theirs) = theirs else {
                    continue;
                };
                let shared = dh_shared(&x, &theirs)?;
                for k in agreed_keys(&shared) {
                    m.insert(k, slot);
                }
            }
        }
    }
    Ok(m)
}

/// Interaction edges the server infers from its own data.
fn server_interactions(
    run: &PrivacyRun,
    snap: &ServerSnapshot,
) -> Result<BTreeMap<String, EdgeResult>> {
    let (items, _) = server_items(snap)?;
    let truth = key_slots(run)?;
    let patients = run.patients();
    let mut by_key: HashMap<&[u8], Vec<&KItem>> = HashMap::new();
    for it in &items {
        by_key.entry(it.key.as_slice()).or_default().push(it);
    }
    let person = |h: &Holder| match h {
        Holder::User(u) | Holder::Patient(u) => run.is_person(*u),
    };
    let mut pp = BTreeSet::new();
    let mut pu = BTreeSet::new();
    let mut uu = BTreeSet::new();
    let mut nx = BTreeSet::new();
    let mut registry_hits: BTreeMap<(UserId, TimeSlot), BTreeSet<UserId>> = BTreeMap::new();
    let ordered = |a: UserId, b: UserId, t: TimeSlot| if a < b { (a, b, t) } else { (b, a, t) };
    for (key, its) in &by_key {
        let slot = truth
            .get(*key)
            .copied()
            .or_else(|| its.iter().find_map(|i| i.slot));
        let Some(slot) = slot else { continue };
        let ps: BTreeSet<UserId> = its
            .iter()
            .filter(|i| person(&i.holder))
            .filter_map(|i| match i.holder {
                Holder::Patient(p) => Some(p),
                _ => None,
            })
            .collect();
        let us: BTreeSet<UserId> = its
            .iter()
            .filter(|i| person(&i.holder))
            .filter_map(|i| match i.holder {
                Holder::User(u) => Some(u),
                _ => None,
            })
            .collect();
        for p in &ps {
            for q in ps.iter().filter(|q| *q > p) {
                pp.insert(ordered(*p, *q, slot));
            }
            for u in us.iter().filter(|u| *u != p) {
                pu.insert((*p, *u, slot));
                if patients.contains(u) {
                    pp.insert(ordered(*p, *u, slot));
                }
            }
            for it in its.iter().filter(|i| person(&i.holder)) {
                if let (Holder::User(u), Some(s)) = (it.holder, it.slot) {
                    if u != *p {
                        registry_hits.entry((*p, s)).or_default().insert(u);
                    }
                }
            }
        }
        let target = if ps.is_empty() { &mut nx } else { &mut uu };
        for u in &us {
            for w in us.iter().filter(|w| *w > u) {
                target.insert((*u, *w, slot));
            }
        }
    }
    for ((_, slot), users) in &registry_hits {
        for u in users {
            for w in users.iter().filter(|w| *w > u) {
                uu.insert((*u, *w, *slot));
            }
        }
    }
    let mut pairs: BTreeSet<(UserId, UserId, TimeSlot)> = BTreeSet::new();
    for e in &run.result.world.encounters {
        if run.is_person(e.a) && run.is_person(e.b) {
            for (slot, _) in split_minutes(e.start_minute, e.minutes) {
                pairs.insert(ordered(e.a, e.b, slot));
            }
        }
    }
    let score = |edges: BTreeSet<(UserId, UserId, TimeSlot)>| {
        let correct = edges
            .iter()
            .filter(|(x, y, t)| {
                let a = run.presence.get(&(*x, t.0));
                a.is_some() && a == run.presence.get(&(*y, t.0))
            })
            .count();
        let hit = edges
            .iter()
            .filter(|(x, y, t)| pairs.contains(&ordered(*x, *y, *t)))
            .count();
        EdgeResult {
            precision: if edges.is_empty() {
                0.0
            } else {
                correct as f64 / edges.len() as f64
            },
            recall: if pairs.is_empty() {
                0.0
            } else {
                hit as f64 / pairs.len() as f64
            },
            correct,
            edges,
        }
    };
    Ok(BTreeMap::from([
        ("patient-patient".to_string(), score(pp)),
        ("patient-user".to_string(), score(pu)),
        ("user-user".to_string(), score(uu)),
        ("user-user-no-exposure".to_string(), score(nx)),
    ]))
}

/// True `(user, slot)` encounter fragments with patients diagnosed on
/// `day`.
fn exposure_slots(run: &PrivacyRun) -> HashSet<(UserId, u32, TimeSlot)> {
    let diag: HashMap<UserId, u32> = run.result.world.diagnoses.iter().copied().collect();
    let mut s = HashSet::new();
    for e in &run.result.world.encounters {
        for (p, u) in [(e.a, e.b), (e.b, e.a)] {
            if let Some(d) = diag.get(&p) {
                for (slot, _) in split_minutes(e.start_minute, e.minutes) {
                    s.insert((u, *d, slot));
                }
            }
        }
    }
    s
}

/// The adaptive subset probe against an interactive matcher.
///
/// The probing user repeatedly queries with half of the remaining
/// candidate records and keeps the half that still yields a positive
/// answer, isolating one matching record in ⌈log₂ k⌉ further queries.
pub fn exposure_time_probe(run: &PrivacyRun) -> Result<Option<ProbeOutcome>> {
    let spec = instantiate(run.protocol);
    if spec.matcher != MatcherKind::Interactive {
        return Ok(None);
    }
    let group = GroupDesc::of_kind(run.scenario.group_kind);
    let server = run
        .result
        .server
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("run has no server".into()))?;
    let reports: Vec<&Report> = server.patient_reports.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(run.scenario.rng_seed ^ 0x9e37_79b9);
    let patients = run.patients();
    let probers: Vec<_> = run
        .result
        .users
        .iter()
        .filter(|u| run.is_person(u.id) && !patients.contains(&u.id))
        .collect();
    match spec.report_kind {
        ReportKind::Sent => {
            let items: Vec<Vec<u8>> = reports
                .iter()
                .flat_map(|r| {
                    r.items().filter_map(|(_, i)| {
                        if let ReportItem::Sent(b) = i {
                            Some(b.encode())
                        } else {
                            None
                        }
                    })
                })
                .collect();
            let psi = PsiCaServer::new(&group, &items, &mut rng)?;
            let published: HashSet<GroupElement> = psi.published().iter().copied().collect();
            let query = |records: &[Vec<u8>], rng: &mut ChaCha8Rng| -> Result<u64> {
                let (client, q) = PsiCaClient::query(&group, records, rng)?;
                let resp = psi.respond(&group, &q, rng)?;
                client.finish(&group, &resp, &published)
            };
            for u in probers {
                let records: Vec<Vec<u8>> =
                    u.encounter_store.iter().map(|r| r.peer.encode()).collect();
                if let Some(out) = bisect(&records, |s| Ok(query(s, &mut rng)? > 0))? {
                    return Ok(Some(out));
                }
            }
            Ok(Some(ProbeOutcome::default()))
        }
        ReportKind::Agreed => {
            let (index, _) = reported_token_index(&group, &reports);
            let mut scratch =
                ServerState::new(RateLimitConfig::default(), QueryStorePolicy::Discard);
            for u in probers {
                let tokens = query_tokens(u)?;
                let day = run.scenario.num_days - 1;
                let probe = |s: &[(crate::crypto::Digest, u32)]| {
                    desire_query(
                        &mut scratch,
                        &index,
                        &DesireQuery {
                            user: u.id,
                            day,
                            tokens: s.to_vec(),
                        },
                    )
                    .map(|r| r > 0)
                };
                let mut probe = probe;
                if let Some(out) = bisect(&tokens, &mut probe)? {
                    return Ok(Some(out));
                }
            }
            Ok(Some(ProbeOutcome::default()))
        }
        ReportKind::Received => {
            let publication = RiPsiPublication::new(&group, &reports, &mut rng)?;
            for u in probers {
                let Some(secret) = u.blinding_secret else {
                    continue;
                };
                let stored: HashSet<GroupElement> = server
                    .uploaded_user_tokens
                    .get(&u.id)
                    .into_iter()
                    .flatten()
                    .filter_map(|s| {
                        if let UploadItem::BlindedSent(e) = s.item {
                            Some(e)
                        } else {
                            None
                        }
                    })
                    .collect();
                let (mut reupload, _) = user_reblind(u.id, &secret, &publication, &mut rng)?;
                if publication.server_match(&group, &reupload, &stored)? == 0 {
                    continue;
                }
                // Probe: send only half of one minute group.
                let candidates = reupload.len();
                if let Some(g) = reupload.groups.values_mut().find(|g| g.len() > 1) {
                    let half = g.len() / 2;
                    g.truncate(half);
                }
                return Ok(Some(
                    match publication.server_match(&group, &reupload, &stored) {
                        Err(Error::Aborted(_)) => ProbeOutcome {
                            success: false,
                            aborted: true,
                            queries: 2,
                            candidates,
                        },
                        Err(e) => return Err(e),
                        Ok(_) => ProbeOutcome {
                            success: true,
                            aborted: false,
                            queries: 2,
                            candidates,
                        },
                    },
                ));
            }
            Ok(Some(ProbeOutcome::default()))
        }
    }
}

/// Bisection over `items` with a positivity oracle; `None` if the full set
/// is negative.
fn bisect<T: Clone, F>(items: &[T], mut positive: F) -> Result<Option<ProbeOutcome>>
where
    F: FnMut(&[T]) -> Result<bool>,
{
    if items.is_empty() || !positive(items)? {
        return Ok(None);
    }
    let mut queries = 1;
    let mut cur = items.to_vec();
    while cur.len() > 1 {
        let right = cur.split_off(cur.len() / 2);
        queries += 1;
        if !positive(&cur)? {
            cur = right;
        }
    }
    Ok(Some(ProbeOutcome {
        success: true,
        aborted: false,
        queries,
        candidates: items.len(),
    }))
}

/// Runs every leakage oracle on a privacy run.
pub fn analyze(run: &PrivacyRun) -> Result<LeakageReport> {
    let spec = instantiate(run.protocol);
    let mut rep = LeakageReport {
        protocol: Some(run.protocol),
        ..LeakageReport::default()
    };
    let server_psv = adversary_view(run, AdversaryKind::ServerPsv)?;
    let server_asv = adversary_view(run, AdversaryKind::ServerAsv)?;
    let user_psv = adversary_view(run, AdversaryKind::UserPsv)?;
    let snap = server_psv.server_side.as_ref().expect("server view");

    // Exposure status.
    rep.exposure_status = snap.learned_risk.clone();
    let es = snap
        .learned_risk
        .iter()
        .any(|(k, r)| *r > 0 && run.result.detected.get(k) == Some(r));
    rep.marks.insert(
        "exposure-status".into(),
        if es { Mark::Leaks } else { Mark::Protected },
    );

    // Exposure time / patient identity.
    let pi = match spec.matcher {
        MatcherKind::User => {
            let truth = exposure_slots(run);
            let published = user_psv.published.as_ref().expect("user view");
            let mut any = false;
            for (u, slots) in &published.matched_slots {
                let good: Vec<TimeSlot> = slots
                    .iter()
                    .filter(|(d, s)| truth.contains(&(*u, *d, *s)))
                    .map(|(_, s)| *s)
                    .collect();
                any |= !good.is_empty();
                rep.exposure_times.insert(*u, good);
            }
            if any {
                Mark::Leaks
            } else {
                Mark::Protected
            }
        }
        MatcherKind::Interactive => {
            let probe = exposure_time_probe(run)?.unwrap_or_default();
            let need = (probe.candidates.max(2) as f64).log2().ceil() as u32;
            let m = if probe.success && probe.queries >= need {
                Mark::Partial
            } else {
                Mark::Protected
            };
            rep.probe = Some(probe);
            m
        }
        MatcherKind::Server => Mark::Protected,
    };
    rep.marks.insert("patient-identity".into(), pi);

    // Movement traces.
    let traces = [
        (
            "trace-all-server-psv",
            server_trace(run, &server_psv, false)?,
        ),
        (
            "trace-all-server-asv",
            server_trace(run, &server_asv, false)?,
        ),
        ("trace-patient-user-psv", user_trace(run, &user_psv)?),
        (
            "trace-patient-server-psv",
            server_trace(run, &server_psv, true)?,
        ),
        (
            "trace-patient-server-asv",
            server_trace(run, &server_asv, true)?,
        ),
    ];
    for (name, t) in traces {
        rep.marks.insert(name.into(), t.mark());
        rep.traces.insert(name.into(), t);
    }

    // Interactions.
    for (name, e) in server_interactions(run, snap)? {
        rep.marks.insert(name.clone(), e.mark());
        rep.interactions.insert(name, e);
    }
    Ok(rep)
}
