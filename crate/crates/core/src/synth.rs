//! Seeded synthetic traffic over a site map.
//!
//! The behaviors are deliberately crude caricatures: a human wanders along
//! links, a scraper hammers one pattern, a crawler sweeps the site breadth
//! first and a brute-forcer probes for files that do not exist.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::request::{HttpMethod, Label, Request, Session, Timestamp};
use crate::sitemap::{NodeId, Sitemap};
use crate::urlpattern::normalize;

/// 2019-01-12T00:00:00Z in milliseconds.
pub const SYNTH_EPOCH_MS: i64 = 1_547_251_200_000;

pub const SYNTH_HOST: &str = "synth.example";

const PROBE_PATHS: &[&str] = &[
    "/backup.zip",
    "/apmserv5.2.6.rar",
    "/wp-login.php",
    "/.env",
    "/admin.php",
    "/config.bak",
    "/db.sql",
    "/phpmyadmin/index.php",
    "/.git/config",
    "/server-status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProfileKind {
    HumanWalk,
    Scraper,
    Crawler,
    Bruteforcer,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::HumanWalk => "human_walk",
            ProfileKind::Scraper => "scraper",
            ProfileKind::Crawler => "crawler",
            ProfileKind::Bruteforcer => "bruteforcer",
        }
    }

    pub fn label(self) -> Label {
        match self {
            ProfileKind::HumanWalk => Label::Human,
            _ => Label::Bot,
        }
    }

    fn user_agent(self) -> &'static str {
        match self {
            ProfileKind::HumanWalk => "Mozilla/5.0 (X11; Linux x86_64) Firefox/115.0",
            ProfileKind::Scraper => "Mozilla/5.0 (compatible; PriceWatch/2.1)",
            ProfileKind::Crawler => "Mozilla/5.0 (compatible; SiteIndexer/1.0)",
            ProfileKind::Bruteforcer => "python-requests/2.31",
        }
    }

    /// Mean inter-request gap used when a profile does not set one.
    pub fn default_mean_gap_ms(self) -> f64 {
        match self {
            ProfileKind::HumanWalk => 8000.0,
            ProfileKind::Scraper => 500.0,
            ProfileKind::Crawler => 1000.0,
            ProfileKind::Bruteforcer => 200.0,
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    /// Follows an outgoing link with this probability, otherwise jumps.
    HumanWalk { follow_probability: f64 },
    /// At least `repeat_fraction` of each session hits `target`.
    Scraper { target: String, repeat_fraction: f64 },
    Crawler,
    /// At least `invalid_fraction` of each session probes missing files.
    Bruteforcer { invalid_fraction: f64 },
}

impl Behavior {
    pub fn kind(&self) -> ProfileKind {
        match self {
            Behavior::HumanWalk { .. } => ProfileKind::HumanWalk,
            Behavior::Scraper { .. } => ProfileKind::Scraper,
            Behavior::Crawler => ProfileKind::Crawler,
            Behavior::Bruteforcer { .. } => ProfileKind::Bruteforcer,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    pub behavior: Behavior,
    /// Inclusive `(min, max)` requests per session.
    pub session_length: (u32, u32),
    pub seed: u64,
    pub mean_gap_ms: f64,
}

impl TrafficProfile {
    pub fn new(behavior: Behavior, session_length: (u32, u32), seed: u64) -> Self {
        let mean_gap_ms = behavior.kind().default_mean_gap_ms();
        TrafficProfile { behavior, session_length, seed, mean_gap_ms }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let (lo, hi) = self.session_length;
        if lo == 0 || lo > hi {
            return Err(SynthError::Profile("session_length needs 1 <= min <= max"));
        }
        if !(self.mean_gap_ms.is_finite() && self.mean_gap_ms >= 0.0) {
            return Err(SynthError::Profile("mean_gap_ms must be finite and >= 0"));
        }
        let fraction = match &self.behavior {
            Behavior::HumanWalk { follow_probability } => Some(*follow_probability),
            Behavior::Scraper { repeat_fraction, .. } => Some(*repeat_fraction),
            Behavior::Bruteforcer { invalid_fraction } => Some(*invalid_fraction),
            Behavior::Crawler => None,
        };
        if let Some(f) = fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(SynthError::Profile("fractions must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid traffic profile: {0}")]
    Profile(&'static str),
    #[error("profile targets pattern {0:?} which is not in the site map")]
    UnknownTarget(String),
    #[error("site map needs at least two non-INVALID nodes, has {0}")]
    TooFewNodes(usize),
}

/// Generates `count` sessions per profile, in profile order.
pub fn generate(sitemap: &Sitemap, profiles: &[(TrafficProfile, usize)]) -> Result<Vec<Session>, SynthError> {
    let pages: Vec<NodeId> = (0..sitemap.len() as u32)
        .map(NodeId)
        .filter(|&id| id != sitemap.invalid_node())
        .collect();
    if pages.len() < 2 {
        return Err(SynthError::TooFewNodes(pages.len()));
    }
    for (p, _) in profiles {
        p.validate()?;
        if let Behavior::Scraper { target, .. } = &p.behavior {
            match sitemap.lookup(target) {
                Some(id) if id != sitemap.invalid_node() => {}
                _ => return Err(SynthError::UnknownTarget(target.clone())),
            }
        }
    }

    let site = Site::new(sitemap, pages);
    let mut out = Vec::new();
    for (index, (profile, count)) in profiles.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
        let kind = profile.behavior.kind();
        for n in 0..*count {
            let session_id = format!("{}-{:x}-{:05}", kind, profile.seed, n);
            let (lo, hi) = profile.session_length;
            let len = rng.random_range(lo..=hi) as usize;
            let hits = site.walk(&profile.behavior, len, &mut rng);
            let client_ip = format!("10.{}.{}.{}", index % 256, (n / 256) % 256, n % 256);
            let mut t = SYNTH_EPOCH_MS + rng.random_range(0..3_600_000);
            let requests = hits
                .into_iter()
                .map(|(uri, status)| {
                    let u: f64 = rng.random();
                    t += libm::round(-libm::log(1.0 - u) * profile.mean_gap_ms) as i64;
                    Request {
                        timestamp: Timestamp(t),
                        http_method: HttpMethod::Get,
                        request_uri: uri,
                        status,
                        host: SYNTH_HOST.into(),
                        user_agent: kind.user_agent().into(),
                        client_ip: client_ip.clone(),
                        session_id: session_id.clone(),
                        label: Some(kind.label()),
                    }
                })
                .collect();
            out.push(Session { session_id, requests, label: Some(kind.label()) });
        }
    }
    Ok(out)
}

struct Site<'a> {
    map: &'a Sitemap,
    pages: Vec<NodeId>,
    out: Vec<Vec<NodeId>>,
}

impl<'a> Site<'a> {
    fn new(map: &'a Sitemap, pages: Vec<NodeId>) -> Self {
        let mut out = alloc::vec![Vec::new(); map.len()];
        for (f, t) in map.edges() {
            if f != map.invalid_node() && t != map.invalid_node() {
                out[f.index()].push(t);
            }
        }
        Site { map, pages, out }
    }

    fn random_page(&self, rng: &mut ChaCha8Rng) -> NodeId {
        self.pages[rng.random_range(0..self.pages.len())]
    }

    fn walk(&self, behavior: &Behavior, len: usize, rng: &mut ChaCha8Rng) -> Vec<(String, u16)> {
        let page = |id: NodeId, rng: &mut ChaCha8Rng| (instantiate(self.map.pattern(id), rng), 200u16);
        match behavior {
            Behavior::HumanWalk { follow_probability } => {
                let mut cur = self.random_page(rng);
                let mut hits = alloc::vec![page(cur, rng)];
                while hits.len() < len {
                    let links = &self.out[cur.index()];
                    cur = if !links.is_empty() && rng.random_bool(*follow_probability) {
                        links[rng.random_range(0..links.len())]
                    } else {
                        self.random_page(rng)
                    };
                    hits.push(page(cur, rng));
                }
                hits
            }
            Behavior::Scraper { target, repeat_fraction } => {
                let target = self.map.lookup(target).expect("validated target");
                let forced = forced_slots(len, *repeat_fraction, rng);
                (0..len)
                    .map(|i| if forced[i] { page(target, rng) } else { page(self.random_page(rng), rng) })
                    .collect()
            }
            Behavior::Crawler => {
                let mut hits = Vec::with_capacity(len);
                let mut seen = BTreeSet::new();
                let mut queue = VecDeque::new();
                while hits.len() < len {
                    let next = match queue.pop_front() {
                        Some(n) => n,
                        None => {
                            // restart from an unvisited page, or start over
                            let fresh: Vec<NodeId> = self.pages.iter().copied().filter(|p| !seen.contains(p)).collect();
                            if fresh.is_empty() {
                                seen.clear();
                                self.random_page(rng)
                            } else {
                                fresh[rng.random_range(0..fresh.len())]
                            }
                        }
                    };
                    if !seen.insert(next) {
                        continue;
                    }
                    hits.push(page(next, rng));
                    for &q in &self.out[next.index()] {
                        if !seen.contains(&q) {
                            queue.push_back(q);
                        }
                    }
                }
                hits
            }
            Behavior::Bruteforcer { invalid_fraction } => {
                let forced = forced_slots(len, *invalid_fraction, rng);
                (0..len)
                    .map(|i| if forced[i] { (self.probe_uri(rng), 404) } else { page(self.random_page(rng), rng) })
                    .collect()
            }
        }
    }

    /// A URI whose pattern is guaranteed absent from the site map.
    fn probe_uri(&self, rng: &mut ChaCha8Rng) -> String {
        let mut uri = String::from(PROBE_PATHS[rng.random_range(0..PROBE_PATHS.len())]);
        while normalize(&uri).ok().and_then(|p| self.map.lookup(p.as_str())).is_some() {
            uri.push('~');
        }
        uri
    }
}

/// Exactly `ceil(fraction * len)` slots set, positions shuffled.
fn forced_slots(len: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = (libm::ceil(fraction * len as f64) as usize).min(len);
    let mut slots: Vec<bool> = (0..len).map(|i| i < n).collect();
    slots.shuffle(rng);
    slots
}

/// Replaces every `*` in a pattern with a fresh number.
pub fn instantiate(pattern: &str, rng: &mut impl Rng) -> String {
    let mut out = String::with_capacity(pattern.len() + 8);
    for ch in pattern.chars() {
        if ch == '*' {
            let v: u32 = rng.random_range(1..100_000);
            out.push_str(&format!("{v}"));
        } else {
            out.push(ch);
        }
    }
    out
}
