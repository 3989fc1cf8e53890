//! Typed request records and sessionization.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Milliseconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn from_millis(ms: i64) -> Self {
        Timestamp(ms)
    }

    pub fn as_millis(self) -> i64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HttpMethod {
    Get,
    Post,
    Put,
    Delete,
    Head,
    Options,
    Patch,
    Other(String),
}

impl HttpMethod {
    pub fn as_str(&self) -> &str {
        match self {
            HttpMethod::Get => "GET",
            HttpMethod::Post => "POST",
            HttpMethod::Put => "PUT",
            HttpMethod::Delete => "DELETE",
            HttpMethod::Head => "HEAD",
            HttpMethod::Options => "OPTIONS",
            HttpMethod::Patch => "PATCH",
            HttpMethod::Other(s) => s,
        }
    }
}

impl FromStr for HttpMethod {
    type Err = core::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "GET" => HttpMethod::Get,
            "POST" => HttpMethod::Post,
            "PUT" => HttpMethod::Put,
            "DELETE" => HttpMethod::Delete,
            "HEAD" => HttpMethod::Head,
            "OPTIONS" => HttpMethod::Options,
            "PATCH" => HttpMethod::Patch,
            other => HttpMethod::Other(other.to_string()),
        })
    }
}

impl fmt::Display for HttpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ground-truth class of a session. `Bot` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Bot,
    Human,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bot => "bot",
            Label::Human => "human",
        }
    }

    pub fn is_bot(self) -> bool {
        matches!(self, Label::Bot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?} (expected \"bot\" or \"human\")")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bot" => Ok(Label::Bot),
            "human" => Ok(Label::Human),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One HTTP request from an access log.
///
/// Only `request_uri` and `status` (plus ordering within the session) feed
/// the trace image. `user_agent` and `client_ip` are identity fields that are
/// carried through for reporting and never used as features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub timestamp: Timestamp,
    pub http_method: HttpMethod,
    pub request_uri: String,
    pub status: u16,
    pub host: String,
    pub user_agent: String,
    pub client_ip: String,
    pub session_id: String,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvalidRequest {
    #[error("status {0} outside [100, 599]")]
    Status(u16),
    #[error("request uri {0:?} does not begin with '/'")]
    Uri(String),
    #[error("empty session id")]
    EmptySession,
}

impl Request {
    pub fn validate(&self) -> Result<(), InvalidRequest> {
        if !(100..=599).contains(&self.status) {
            return Err(InvalidRequest::Status(self.status));
        }
        if !self.request_uri.starts_with('/') {
            return Err(InvalidRequest::Uri(self.request_uri.clone()));
        }
        if self.session_id.is_empty() {
            return Err(InvalidRequest::EmptySession);
        }
        Ok(())
    }
}

/// Requests sharing one session id, sorted by timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub session_id: String,
    pub requests: Vec<Request>,
    pub label: Option<Label>,
}

impl Session {
    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("session {session_id:?} carries both bot and human labels")]
    LabelConflict { session_id: String },
}

/// Groups requests by session id.
///
/// Within a session requests are stably sorted by timestamp. Sessions are
/// ordered by their first timestamp, ties broken by first appearance in the
/// input. Requests without a label do not conflict with labeled ones.
pub fn sessionize(requests: Vec<Request>) -> Result<Vec<Session>, SessionError> {
    // session id -> (first input position, members)
    let mut groups: BTreeMap<String, (usize, Vec<Request>)> = BTreeMap::new();
    for (pos, req) in requests.into_iter().enumerate() {
        match groups.get_mut(&req.session_id) {
            Some((_, members)) => members.push(req),
            None => {
                let key = req.session_id.clone();
                groups.insert(key, (pos, alloc::vec![req]));
            }
        }
    }

    let mut sessions = Vec::with_capacity(groups.len());
    for (session_id, (first_pos, mut members)) in groups {
        members.sort_by_key(|r| r.timestamp);
        let mut label = None;
        for r in &members {
            match (label, r.label) {
                (_, None) => {}
                (None, Some(l)) => label = Some(l),
                (Some(a), Some(b)) if a != b => {
                    return Err(SessionError::LabelConflict { session_id });
                }
                _ => {}
            }
        }
        sessions.push((
            first_pos,
            Session {
                session_id,
                requests: members,
                label,
            },
        ));
    }
    sessions.sort_by_key(|(pos, s)| (s.requests[0].timestamp, *pos));
    Ok(sessions.into_iter().map(|(_, s)| s).collect())
}
