//! Directed graph of URL patterns with the reserved INVALID node.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::request::Session;
use crate::urlpattern::normalize;

/// Pattern text of the node that absorbs error responses and unknown URLs.
pub const INVALID_PATTERN: &str = "INVALID";

/// Index of a node in its [`Sitemap`]. Ids follow first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A position in the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SitemapError {
    #[error("duplicate node pattern {0:?}")]
    DuplicateNode(String),
    #[error("edge references unknown pattern {0:?}")]
    UnknownPattern(String),
    #[error("edge endpoint {0} out of range")]
    EdgeOutOfRange(NodeId),
    #[error("INVALID node missing or duplicated")]
    InvalidNode,
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("coordinate for {pattern:?} outside the unit square: ({x}, {y})")]
    CoordinateRange { pattern: String, x: f64, y: f64 },
    #[error("no coordinate given for node {0:?}")]
    MissingCoordinate(String),
}

/// Site map `G = (V, E)` over URL patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct Sitemap {
    nodes: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: BTreeSet<(NodeId, NodeId)>,
    invalid: NodeId,
    coordinates: Option<Vec<Point>>,
}

impl Sitemap {
    /// A site map holding only the INVALID node.
    pub fn empty() -> Self {
        SitemapBuilder::new().finish()
    }

    /// Builds a site map from listed node patterns and pattern-pair edges.
    ///
    /// INVALID is appended when absent. Coordinates, when given, must cover
    /// every node (including INVALID) and lie in the unit square.
    pub fn from_parts<S: AsRef<str>>(
        nodes: &[S],
        edges: &[(S, S)],
        coordinates: Option<&BTreeMap<String, Point>>,
    ) -> Result<Self, SitemapError> {
        let mut b = SitemapBuilder::new();
        for n in nodes {
            b.insert_unique(n.as_ref())?;
        }
        for (from, to) in edges {
            let f = b
                .lookup(from.as_ref())
                .ok_or_else(|| SitemapError::UnknownPattern(from.as_ref().to_string()))?;
            let t = b
                .lookup(to.as_ref())
                .ok_or_else(|| SitemapError::UnknownPattern(to.as_ref().to_string()))?;
            b.add_edge(f, t);
        }
        let map = b.finish();
        match coordinates {
            None => Ok(map),
            Some(coords) => {
                if let Some(extra) = coords.keys().find(|k| map.lookup(k).is_none()) {
                    return Err(SitemapError::UnknownPattern(extra.clone()));
                }
                let points = map
                    .nodes
                    .iter()
                    .map(|p| coords.get(p).copied().ok_or_else(|| SitemapError::MissingCoordinate(p.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                map.with_coordinates(points)
            }
        }
    }

    /// Passive sniffing: nodes are the distinct patterns of requests answered
    /// with status < 400, edges join adjacent such requests within a session.
    pub fn build_from_sessions(sessions: &[Session]) -> Self {
        let mut b = SitemapBuilder::new();
        for session in sessions {
            let mut prev: Option<NodeId> = None;
            for req in &session.requests {
                let node = if req.status < 400 {
                    normalize(&req.request_uri).ok().map(|p| b.add_node(p.as_str()))
                } else {
                    None
                };
                if let (Some(p), Some(q)) = (prev, node) {
                    b.add_edge(p, q);
                }
                prev = node;
            }
        }
        b.finish()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Never true: the INVALID node is always present.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pattern(&self, id: NodeId) -> &str {
        &self.nodes[id.index()]
    }

    pub fn patterns(&self) -> impl ExactSizeIterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn lookup(&self, pattern: &str) -> Option<NodeId> {
        self.index.get(pattern).copied()
    }

    pub fn invalid_node(&self) -> NodeId {
        self.invalid
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn coordinates(&self) -> Option<&[Point]> {
        self.coordinates.as_deref()
    }

    pub fn coordinate(&self, id: NodeId) -> Option<Point> {
        self.coordinates.as_ref().map(|c| c[id.index()])
    }

    /// Attaches per-node coordinates, replacing any existing ones.
    pub fn with_coordinates(mut self, points: Vec<Point>) -> Result<Self, SitemapError> {
        check_coordinates(&self.nodes, &points)?;
        self.coordinates = Some(points);
        Ok(self)
    }

    pub fn without_coordinates(mut self) -> Self {
        self.coordinates = None;
        self
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), SitemapError> {
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.as_str()) {
                return Err(SitemapError::DuplicateNode(n.clone()));
            }
        }
        if self.nodes.iter().filter(|n| *n == INVALID_PATTERN).count() != 1
            || self.pattern(self.invalid) != INVALID_PATTERN
        {
            return Err(SitemapError::InvalidNode);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if self.index.get(n) != Some(&NodeId(i as u32)) {
                return Err(SitemapError::DuplicateNode(n.clone()));
            }
        }
        for &(f, t) in &self.edges {
            for id in [f, t] {
                if id.index() >= self.nodes.len() {
                    return Err(SitemapError::EdgeOutOfRange(id));
                }
            }
        }
        if let Some(points) = &self.coordinates {
            check_coordinates(&self.nodes, points)?;
        }
        Ok(())
    }
}

fn check_coordinates(nodes: &[String], points: &[Point]) -> Result<(), SitemapError> {
    if points.len() != nodes.len() {
        return Err(SitemapError::CoordinateCount { expected: nodes.len(), got: points.len() });
    }
    for (p, n) in points.iter().zip(nodes) {
        if !((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y)) {
            return Err(SitemapError::CoordinateRange { pattern: n.clone(), x: p.x, y: p.y });
        }
    }
    Ok(())
}

/// Incremental construction; ids are handed out in first-seen order.
#[derive(Debug, Default, Clone)]
pub struct SitemapBuilder {
    nodes: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl SitemapBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `pattern`, inserting it if new.
    pub fn add_node(&mut self, pattern: &str) -> NodeId {
        if let Some(id) = self.index.get(pattern) {
            return *id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(pattern.to_string());
        self.index.insert(pattern.to_string(), id);
        id
    }

    /// Like [`add_node`](Self::add_node) but rejects repeats. A listed
    /// INVALID node is accepted once.
    pub fn insert_unique(&mut self, pattern: &str) -> Result<NodeId, SitemapError> {
        if self.index.contains_key(pattern) {
            return Err(SitemapError::DuplicateNode(pattern.to_string()));
        }
        Ok(self.add_node(pattern))
    }

    pub fn lookup(&self, pattern: &str) -> Option<NodeId> {
        self.index.get(pattern).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds a directed edge. Self-loops are ignored.
    ///
    /// # Panics
    /// If either id was not produced by this builder.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId) {
        assert!(from.index() < self.nodes.len() && to.index() < self.nodes.len());
        if from != to {
            self.edges.insert((from, to));
        }
    }

    /// Appends INVALID if it is not already present.
    pub fn finish(mut self) -> Sitemap {
        let invalid = self.add_node(INVALID_PATTERN);
        Sitemap {
            nodes: self.nodes,
            index: self.index,
            edges: self.edges,
            invalid,
            coordinates: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::{HttpMethod, Request, Timestamp};
    use alloc::vec;

    fn session(id: &str, hits: &[(&str, u16)]) -> Session {
        let requests = hits
            .iter()
            .enumerate()
            .map(|(i, (uri, status))| Request {
                timestamp: Timestamp(i as i64),
                http_method: HttpMethod::Get,
                request_uri: uri.to_string(),
                status: *status,
                host: "h".into(),
                user_agent: "ua".into(),
                client_ip: "ip".into(),
                session_id: id.into(),
                label: None,
            })
            .collect();
        Session { session_id: id.into(), requests, label: None }
    }

    fn edge_set(m: &Sitemap) -> BTreeSet<(String, String)> {
        m.edges().map(|(f, t)| (m.pattern(f).to_string(), m.pattern(t).to_string())).collect()
    }

    #[test]
    fn sniffed_adjacency() {
        let m = Sitemap::build_from_sessions(&[session("s", &[("/a", 200), ("/b", 200), ("/a", 200)])]);
        m.validate().unwrap();
        assert_eq!(m.patterns().collect::<Vec<_>>(), ["/a", "/b", "INVALID"]);
        let expected: BTreeSet<_> =
            [("/a".to_string(), "/b".to_string()), ("/b".to_string(), "/a".to_string())].into();
        assert_eq!(edge_set(&m), expected);
    }

    #[test]
    fn empty_input_has_only_invalid() {
        let m = Sitemap::build_from_sessions(&[]);
        m.validate().unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.pattern(m.invalid_node()), INVALID_PATTERN);
        assert_eq!(m.edge_count(), 0);
    }

    #[test]
    fn error_targets_are_not_sniffed() {
        let m = Sitemap::build_from_sessions(&[session("s", &[("/a", 200), ("/missing", 404)])]);
        assert_eq!(m.patterns().collect::<Vec<_>>(), ["/a", "INVALID"]);
        assert_eq!(m.edge_count(), 0);
    }

    #[test]
    fn error_breaks_adjacency() {
        let m = Sitemap::build_from_sessions(&[session(
            "s",
            &[("/a", 200), ("/x", 500), ("/b", 200), ("/b?id=3", 302)],
        )]);
        let expected: BTreeSet<_> = [("/b".to_string(), "/b?id=*".to_string())].into();
        assert_eq!(edge_set(&m), expected);
    }

    #[test]
    fn from_parts_appends_invalid_once() {
        let m = Sitemap::from_parts(&["/", "/page?id=*"], &[("/", "/page?id=*")], None).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.edge_count(), 1);
        let m = Sitemap::from_parts(&["/", "INVALID"], &[], None).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.invalid_node(), NodeId(1));
        m.validate().unwrap();
    }

    #[test]
    fn from_parts_errors() {
        assert_eq!(
            Sitemap::from_parts(&["/", "/"], &[], None),
            Err(SitemapError::DuplicateNode("/".into()))
        );
        assert_eq!(
            Sitemap::from_parts(&["/"], &[("/", "/nowhere")], None),
            Err(SitemapError::UnknownPattern("/nowhere".into()))
        );
    }

    #[test]
    fn coordinates_checked() {
        let m = Sitemap::from_parts(&["/a"], &[], None).unwrap();
        assert!(matches!(
            m.clone().with_coordinates(vec![Point::new(0.5, 0.5)]),
            Err(SitemapError::CoordinateCount { .. })
        ));
        assert!(matches!(
            m.clone().with_coordinates(vec![Point::new(0.5, 0.5), Point::new(1.5, 0.0)]),
            Err(SitemapError::CoordinateRange { .. })
        ));
        let m = m.with_coordinates(vec![Point::new(0.0, 1.0), Point::new(1.0, 0.0)]).unwrap();
        m.validate().unwrap();
        assert_eq!(m.coordinate(NodeId(1)), Some(Point::new(1.0, 0.0)));
    }

    #[test]
    fn session_order_does_not_change_graph() {
        let s1 = session("1", &[("/a", 200), ("/b?id=1", 200), ("/c", 200)]);
        let s2 = session("2", &[("/c", 200), ("/d/42", 200), ("/a", 200)]);
        let fwd = Sitemap::build_from_sessions(&[s1.clone(), s2.clone()]);
        let rev = Sitemap::build_from_sessions(&[s2, s1]);
        let nodes = |m: &Sitemap| m.patterns().map(String::from).collect::<BTreeSet<_>>();
        assert_eq!(nodes(&fwd), nodes(&rev));
        assert_eq!(edge_set(&fwd), edge_set(&rev));
    }
}
