//! Shuffle-based Diffie-Hellman private set-intersection cardinality.
//!
//! The server holds a key `k` and publishes `{H(x)^k}` for its set. The user
//! sends `{H(y)^r}` for a fresh `r`; the server raises every element to `k`
//! and returns the result shuffled. The user removes `r` and counts how many
//! returned values occur in the published set. Because of the shuffle the
//! user learns only the size of the intersection; the server learns only
//! the size of the user's set.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::crypto::{blind_pow, unblind_pow, GroupDesc, GroupElement, Scalar};
use crate::error::{Error, Result};

/// Server side of the protocol.
#[derive(Clone, Debug)]
pub struct PsiCaServer {
    key: Scalar,
    published: Vec<GroupElement>,
}

impl PsiCaServer {
    /// Blinds the server set under a fresh key. The published list is
    /// sorted so that its order reveals nothing about insertion order.
    pub fn new<I, T, R>(group: &GroupDesc, items: I, rng: &mut R) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
        R: RngCore + ?Sized,
    {
        let key = group.random_scalar(rng);
        let mut published = items
            .into_iter()
            .map(|x| blind_pow(&group.hash_to_group(x.as_ref()), &key))
            .collect::<Result<Vec<_>>>()?;
        published.sort();
        published.dedup();
        Ok(PsiCaServer { key, published })
    }

    /// The published blinded set `{H(x)^k}`.
    pub fn published(&self) -> &[GroupElement] {
        &self.published
    }

    /// Applies the key to a user query and shuffles the result.
    ///
    /// # Errors
    /// Aborts with [`Error::Aborted`] if any element is not in `group`.
    pub fn respond<R: RngCore + ?Sized>(
        &self,
        group: &GroupDesc,
        query: &[GroupElement],
        rng: &mut R,
    ) -> Result<Vec<GroupElement>> {
        let mut out = Vec::with_capacity(query.len());
        for e in query {
            if !group.contains(e) || e.is_identity() {
                return Err(Error::Aborted(
                    "PSI-CA query element outside the group".into(),
                ));
            }
            out.push(blind_pow(e, &self.key)?);
        }
        out.shuffle(rng);
        Ok(out)
    }
}

/// User side of one query.
#[derive(Clone, Debug)]
pub struct PsiCaClient {
    r: Scalar,
}

impl PsiCaClient {
    /// Blinds the user's items `{H(y)^r}` under a fresh `r`.
    pub fn query<I, T, R>(
        group: &GroupDesc,
        items: I,
        rng: &mut R,
    ) -> Result<(Self, Vec<GroupElement>)>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
        R: RngCore + ?Sized,
    {
        let r = group.random_scalar(rng);
        let q = items
            .into_iter()
            .map(|y| blind_pow(&group.hash_to_group(y.as_ref()), &r))
            .collect::<Result<Vec<_>>>()?;
        Ok((PsiCaClient { r }, q))
    }

    /// Removes `r` from the server response and counts members of the
    /// published set.
    ///
    /// # Errors
    /// Aborts if the response contains a foreign element.
    pub fn finish(
        &self,
        group: &GroupDesc,
        response: &[GroupElement],
        published: &HashSet<GroupElement>,
    ) -> Result<u64> {
        let mut count = 0;
        for e in response {
            if !group.contains(e) {
                return Err(Error::Aborted(
                    "PSI-CA response element outside the group".into(),
                ));
            }
            if published.contains(&unblind_pow(e, &self.r)?) {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Messages exchanged in one run, as seen on the wire.
#[derive(Clone, Debug)]
pub struct PsiCaTranscript {
    /// Published blinded server set.
    pub published: Vec<GroupElement>,
    /// User query.
    pub query: Vec<GroupElement>,
    /// Shuffled server response.
    pub response: Vec<GroupElement>,
}

/// One complete run between a server set and a user set; returns the
/// intersection cardinality (counting user multiplicity) and the transcript.
pub fn psi_ca_round<R: RngCore + ?Sized>(
    group: &GroupDesc,
    server_items: &[Vec<u8>],
    user_items: &[Vec<u8>],
    rng: &mut R,
) -> Result<(u64, PsiCaTranscript)> {
    let server = PsiCaServer::new(group, server_items, rng)?;
    let (client, query) = PsiCaClient::query(group, user_items, rng)?;
    let response = server.respond(group, &query, rng)?;
    let published: HashSet<GroupElement> = server.published().iter().copied().collect();
    let n = client.finish(group, &response, &published)?;
    Ok((
        n,
        PsiCaTranscript {
            published: server.published,
            query,
            response,
        },
    ))
}
