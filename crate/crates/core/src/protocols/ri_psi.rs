//! Received-Interactive matching with double blinding.
//!
//! 1. Each user uploads her sent beacons blinded by a long-term secret `s`:
//!    `g^{xs}`.
//! 2. Patients report the raw beacons they heard, `g^{x'}`, with minutes.
//! 3. The server blinds each reported beacon with a fresh `t`, giving
//!    `g^{x't}`, and publishes them in per-patient batches.
//! 4. The user raises every value to `s` (`g^{x'ts}`), groups the results by
//!    minute value, shuffles, and re-uploads.
//! 5. The server removes `t` and matches `g^{x's}` against the user's
//!    uploads, learning only her total exposure amount.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::crypto::{blind_pow, unblind_pow, GroupDesc, GroupElement, Scalar};
use crate::error::{Error, Result};
use crate::framework::{Report, ReportItem, UserId};

/// One patient's reported beacons after server blinding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatientBatch {
    /// `(g^{x't}, minutes)`, sorted by element encoding.
    pub items: Vec<(GroupElement, u32)>,
}

/// The server's blinded publication for one round.
#[derive(Clone, Debug)]
pub struct RiPsiPublication {
    t: Scalar,
    /// Per-patient batches as downloaded by users.
    pub batches: Vec<PatientBatch>,
}

impl RiPsiPublication {
    /// Blinds the received beacons of `reports` under a fresh `t`.
    ///
    /// # Errors
    /// Report items that are not group beacons are rejected.
    pub fn new<R: RngCore + ?Sized>(
        group: &GroupDesc,
        reports: &[&Report],
        rng: &mut R,
    ) -> Result<Self> {
        let t = group.random_scalar(rng);
        let mut batches = Vec::new();
        for r in reports {
            let mut items = Vec::new();
            for (_, item) in r.items() {
                let ReportItem::Received { beacon, minutes } = item else {
                    return Err(Error::Malformed(
                        "RI-PSI reports carry received beacons".into(),
                    ));
                };
                let e = beacon
                    .as_group()
                    .ok_or_else(|| Error::Malformed("RI-PSI needs group beacons".into()))?;
                if !group.contains(e) {
                    return Err(Error::Malformed("reported beacon outside the group".into()));
                }
                items.push((blind_pow(e, &t)?, *minutes));
            }
            items.sort();
            batches.push(PatientBatch { items });
        }
        Ok(RiPsiPublication { t, batches })
    }

    /// Total number of published tokens.
    pub fn len(&self) -> usize {
        self.batches.iter().map(|b| b.items.len()).sum()
    }

    /// Whether nothing was published.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Removes `t` from a user's re-upload and matches it against the
    /// user's stored blinded sent beacons. Returns the exposure in minutes.
    ///
    /// # Errors
    /// The round aborts if the re-upload does not contain exactly as many
    /// tokens as were published, or contains foreign elements.
    pub fn server_match(
        &self,
        group: &GroupDesc,
        reupload: &UserReupload,
        stored: &HashSet<GroupElement>,
    ) -> Result<u64> {
        let n: usize = reupload.groups.values().map(Vec::len).sum();
        if n != self.len() {
            return Err(Error::Aborted(format!(
                "RI-PSI re-upload has {n} tokens but {} were published",
                self.len()
            )));
        }
        let mut risk = 0u64;
        for (minutes, values) in &reupload.groups {
            for v in values {
                if !group.contains(v) {
                    return Err(Error::Aborted(
                        "RI-PSI re-upload element outside the group".into(),
                    ));
                }
                if stored.contains(&unblind_pow(v, &self.t)?) {
                    risk += u64::from(*minutes);
                }
            }
        }
        Ok(risk)
    }
}

/// A user's re-upload: doubly blinded values grouped by minute value, each
/// group shuffled so no value can be tied to a patient batch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserReupload {
    /// Querying user.
    pub user: UserId,
    /// minutes → shuffled `g^{x'ts}` values.
    pub groups: BTreeMap<u32, Vec<GroupElement>>,
}

impl UserReupload {
    /// Number of uploaded tokens.
    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    /// Whether the re-upload is empty.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// What the user sees: the number of patients and per-patient counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserDownloadView {
    /// Number of tokens in each patient batch.
    pub per_patient_counts: Vec<usize>,
}

/// The user's step: raise every published value to `s`, group by minutes
/// and shuffle.
pub fn user_reblind<R: RngCore + ?Sized>(
    user: UserId,
    secret: &Scalar,
    publication: &RiPsiPublication,
    rng: &mut R,
) -> Result<(UserReupload, UserDownloadView)> {
    let mut groups: BTreeMap<u32, Vec<GroupElement>> = BTreeMap::new();
    for batch in &publication.batches {
        for (e, m) in &batch.items {
            groups.entry(*m).or_default().push(blind_pow(e, secret)?);
        }
    }
    for g in groups.values_mut() {
        g.shuffle(rng);
    }
    let view = UserDownloadView {
        per_patient_counts: publication.batches.iter().map(|b| b.items.len()).collect(),
    };
    Ok((UserReupload { user, groups }, view))
}

/// Blinds a user's sent beacons for upload: `g^{xs}`.
pub fn blind_sent(secret: &Scalar, sent: &[GroupElement]) -> Result<Vec<GroupElement>> {
    sent.iter().map(|e| blind_pow(e, secret)).collect()
}

/// One complete honest round for a single user; returns her exposure in
/// minutes.
pub fn ri_psi_round<R: RngCore + ?Sized>(
    group: &GroupDesc,
    reports: &[&Report],
    user: UserId,
    secret: &Scalar,
    stored_blinded_sent: &HashSet<GroupElement>,
    rng: &mut R,
) -> Result<(u64, UserDownloadView)> {
    let publication = RiPsiPublication::new(group, reports, rng)?;
    let (reupload, view) = user_reblind(user, secret, &publication, rng)?;
    Ok((
        publication.server_match(group, &reupload, stored_blinded_sent)?,
        view,
    ))
}
