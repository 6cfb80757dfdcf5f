//! Agreed-Interactive query matching with query-and-discard.
//!
//! Each query carries the ordered tokens of every retained encounter. The
//! server derives both candidate ordered tokens from each patient-reported
//! agreed value, returns the summed minutes of matching tokens, and — under
//! [`QueryStorePolicy::Discard`] — keeps nothing of the query.

use std::collections::HashMap;

use crate::crypto::{ordered_token_pair, Digest, GroupDesc};
use crate::error::Result;
use crate::framework::{QueryStorePolicy, Report, ReportItem, ServerState, StoredQuery, UserId};

/// One user query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesireQuery {
    /// Querying user.
    pub user: UserId,
    /// Day of the query.
    pub day: u32,
    /// Ordered tokens with minutes of contact.
    pub tokens: Vec<(Digest, u32)>,
}

/// Both ordered tokens of every agreed value in `reports`.
///
/// Values outside `group` are skipped and counted in the second component.
pub fn reported_token_index(
    group: &GroupDesc,
    reports: &[&Report],
) -> (HashMap<Digest, usize>, u64) {
    let mut index = HashMap::new();
    let mut rejected = 0;
    for r in reports {
        for (_, item) in r.items() {
            if let ReportItem::Agreed { shared, .. } = item {
                if !group.contains(shared) {
                    rejected += 1;
                    continue;
                }
                for d in ordered_token_pair(shared) {
                    *index.entry(d).or_insert(0) += 1;
                }
            }
        }
    }
    (index, rejected)
}

/// Answers a query against the reported tokens; returns the risk in minutes.
///
/// With [`QueryStorePolicy::Store`] the query is appended to the server's
/// stored queries; with `Discard` the server state is left untouched.
pub fn desire_query(
    server: &mut ServerState,
    index: &HashMap<Digest, usize>,
    query: &DesireQuery,
) -> Result<u64> {
    let risk = query
        .tokens
        .iter()
        .filter(|(d, _)| index.contains_key(d))
        .map(|(_, m)| u64::from(*m))
        .sum();
    if server.query_store_policy == QueryStorePolicy::Store {
        server.stored_queries.push(StoredQuery {
            user: query.user,
            day: query.day,
            tokens: query.tokens.iter().map(|(d, _)| *d).collect(),
        });
    }
    Ok(risk)
}
