//! Projection of sessions onto the site map.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::request::{Label, Request, Session};
use crate::sitemap::{NodeId, Sitemap};
use crate::urlpattern::normalize;

/// Default spot threshold: sessions need strictly more distinct nodes.
pub const DEFAULT_MIN_SPOTS: usize = 3;

/// Per-session access frequencies and traversed edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSubgraph {
    pub session_id: String,
    pub frequencies: BTreeMap<NodeId, u32>,
    /// Directed, never self-loops.
    pub edges: BTreeSet<(NodeId, NodeId)>,
    pub label: Option<Label>,
}

impl SessionSubgraph {
    /// Number of distinct nodes, i.e. spots in the trace image.
    pub fn spot_count(&self) -> usize {
        self.frequencies.len()
    }

    pub fn request_count(&self) -> u64 {
        self.frequencies.values().map(|&f| u64::from(f)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubgraphError {
    #[error("session {0:?} has no requests")]
    EmptySession(String),
}

/// Node a request lands on. Error statuses (>= 400) and patterns missing
/// from the site map go to INVALID.
pub fn map_request(sitemap: &Sitemap, request: &Request) -> NodeId {
    if request.status >= 400 {
        return sitemap.invalid_node();
    }
    normalize(&request.request_uri)
        .ok()
        .and_then(|p| sitemap.lookup(p.as_str()))
        .unwrap_or_else(|| sitemap.invalid_node())
}

pub fn map_session(sitemap: &Sitemap, session: &Session) -> Result<SessionSubgraph, SubgraphError> {
    if session.requests.is_empty() {
        return Err(SubgraphError::EmptySession(session.session_id.clone()));
    }
    let mut frequencies = BTreeMap::new();
    let mut edges = BTreeSet::new();
    let mut prev: Option<NodeId> = None;
    for req in &session.requests {
        let node = map_request(sitemap, req);
        *frequencies.entry(node).or_insert(0) += 1;
        if let Some(p) = prev {
            if p != node {
                edges.insert((p, node));
            }
        }
        prev = Some(node);
    }
    Ok(SessionSubgraph {
        session_id: session.session_id.clone(),
        frequencies,
        edges,
        label: session.label,
    })
}

/// Keeps subgraphs with strictly more than `min_spots_exclusive` distinct nodes.
pub fn filter_min_spots(subgraphs: Vec<SessionSubgraph>, min_spots_exclusive: usize) -> Vec<SessionSubgraph> {
    subgraphs.into_iter().filter(|s| s.spot_count() > min_spots_exclusive).collect()
}
