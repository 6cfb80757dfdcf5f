//! Agreed-Server matching against stored ordered tokens.

use std::collections::{BTreeMap, HashMap};

use crate::crypto::{ordered_token_pair, Digest, GroupDesc};
use crate::framework::{Report, ReportItem, ServerState, UploadItem, UserId};

/// Result of matching one report.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SdhMatch {
    /// Matched minutes per user.
    pub per_user: BTreeMap<UserId, u64>,
    /// Distinct users matched per reported agreed value.
    pub per_item_users: Vec<usize>,
    /// Report items rejected as not belonging to the group.
    pub rejected: u64,
}

/// Index of stored ordered tokens: digest → (user, minutes).
pub fn stored_token_index(server: &ServerState) -> HashMap<Digest, Vec<(UserId, u32)>> {
    let mut index: HashMap<Digest, Vec<(UserId, u32)>> = HashMap::new();
    for (user, items) in &server.uploaded_user_tokens {
        for stored in items {
            if let UploadItem::OrderedToken { token, minutes } = stored.item {
                index.entry(token).or_default().push((*user, minutes));
            }
        }
    }
    index
}

/// Matches one report against the stored tokens.
///
/// For every reported `g^{xx'}` both ordered tokens are derived; a stored
/// token equal to either counts. The patient's own tokens never expose her.
pub fn sdh_match(
    group: &GroupDesc,
    index: &HashMap<Digest, Vec<(UserId, u32)>>,
    report: &Report,
) -> SdhMatch {
    let mut out = SdhMatch::default();
    for (_, item) in report.items() {
        let ReportItem::Agreed { shared, .. } = item else {
            out.rejected += 1;
            continue;
        };
        if !group.contains(shared) || shared.is_identity() {
            out.rejected += 1;
            continue;
        }
        let mut users = Vec::new();
        for d in ordered_token_pair(shared) {
            for (u, m) in index.get(&d).into_iter().flatten() {
                if *u == report.patient {
                    continue;
                }
                *out.per_user.entry(*u).or_insert(0) += u64::from(*m);
                users.push(*u);
            }
        }
        users.sort_unstable();
        users.dedup();
        out.per_item_users.push(users.len());
    }
    out
}
