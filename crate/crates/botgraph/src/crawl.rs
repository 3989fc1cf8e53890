//! Active crawling: breadth-first from the home page, one fetch per URL pattern.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Duration;

use botgraph_core::{normalize, NodeId, Sitemap, SitemapBuilder};
use scraper::{Html, Selector};
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct FetchError(pub String);

/// Source of pages. Implementations need not be thread-safe; the crawler
/// issues one request at a time.
pub trait Fetcher {
    fn fetch(&mut self, url: &Url) -> Result<Page, FetchError>;
}

/// Blocking HTTP GET.
pub struct HttpFetcher {
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new(timeout: Duration, user_agent: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .user_agent(user_agent)
            .http_status_as_error(false)
            .build()
            .into();
        HttpFetcher { agent }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&mut self, url: &Url) -> Result<Page, FetchError> {
        let mut resp = self.agent.get(url.as_str()).call().map_err(|e| FetchError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| FetchError(e.to_string()))?;
        Ok(Page { status, body })
    }
}

/// In-memory pages keyed by absolute URL; unknown URLs answer 404.
#[derive(Debug, Default, Clone)]
pub struct StaticFetcher {
    pub pages: BTreeMap<String, Page>,
    pub requested: Vec<String>,
}

impl StaticFetcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn page(mut self, url: &str, body: &str) -> Self {
        self.pages.insert(url.to_string(), Page { status: 200, body: body.to_string() });
        self
    }
}

impl Fetcher for StaticFetcher {
    fn fetch(&mut self, url: &Url) -> Result<Page, FetchError> {
        self.requested.push(url.to_string());
        Ok(self
            .pages
            .get(url.as_str())
            .cloned()
            .unwrap_or(Page { status: 404, body: String::new() }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlOptions {
    /// Stop admitting new patterns once this many are known.
    pub max_patterns: usize,
    /// Honour `Disallow` rules for `User-agent: *` in /robots.txt.
    pub respect_robots: bool,
}

impl Default for CrawlOptions {
    fn default() -> Self {
        CrawlOptions { max_patterns: 1000, respect_robots: true }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CrawlError {
    #[error("invalid start url {0:?}")]
    StartUrl(String),
    #[error("fetching start page {url} failed: {reason}")]
    Start { url: String, reason: String },
    #[error("max_patterns must be at least 1")]
    Budget,
}

#[derive(Debug, Clone)]
pub struct CrawlReport {
    pub sitemap: Sitemap,
    /// URLs fetched, in order.
    pub fetched: Vec<String>,
    /// Pages that failed to load, with the reason.
    pub failures: Vec<(String, String)>,
}

pub fn crawl<F: Fetcher>(fetcher: &mut F, start: &str, options: &CrawlOptions) -> Result<CrawlReport, CrawlError> {
    if options.max_patterns == 0 {
        return Err(CrawlError::Budget);
    }
    let start = Url::parse(start).map_err(|_| CrawlError::StartUrl(start.to_string()))?;
    if !matches!(start.scheme(), "http" | "https") || start.host_str().is_none() {
        return Err(CrawlError::StartUrl(start.to_string()));
    }
    let disallowed = if options.respect_robots { robots_disallow(fetcher, &start) } else { Vec::new() };

    let mut builder = SitemapBuilder::new();
    let start_node = builder.add_node(url_pattern(&start).as_str());
    let mut queue: VecDeque<(Url, NodeId)> = VecDeque::from([(start.clone(), start_node)]);
    let mut report_fetched = Vec::new();
    let mut failures = Vec::new();

    while let Some((url, node)) = queue.pop_front() {
        report_fetched.push(url.to_string());
        let page = match fetcher.fetch(&url) {
            Ok(p) if p.status < 400 => p,
            Ok(p) => {
                let reason = format!("status {}", p.status);
                if node == start_node {
                    return Err(CrawlError::Start { url: url.to_string(), reason });
                }
                failures.push((url.to_string(), reason));
                continue;
            }
            Err(e) => {
                if node == start_node {
                    return Err(CrawlError::Start { url: url.to_string(), reason: e.0 });
                }
                failures.push((url.to_string(), e.0));
                continue;
            }
        };

        for href in extract_links(&page.body) {
            let Some(target) = resolve_link(&url, &href) else { continue };
            if !same_site(&start, &target) || is_disallowed(&disallowed, target.path()) {
                continue;
            }
            let pattern = url_pattern(&target);
            let to = match builder.lookup(pattern.as_str()) {
                Some(id) => id,
                None if builder.len() < options.max_patterns => {
                    let id = builder.add_node(pattern.as_str());
                    queue.push_back((target, id));
                    id
                }
                None => continue,
            };
            builder.add_edge(node, to);
        }
    }

    Ok(CrawlReport { sitemap: builder.finish(), fetched: report_fetched, failures })
}

fn url_pattern(url: &Url) -> botgraph_core::UrlPattern {
    let mut s = url.path().to_string();
    if let Some(q) = url.query() {
        s.push('?');
        s.push_str(q);
    }
    normalize(&s).expect("http urls have absolute paths")
}

/// `href` values of anchor tags, in document order.
pub fn extract_links(html: &str) -> Vec<String> {
    let doc = Html::parse_document(html);
    let sel = Selector::parse("a[href]").expect("static selector");
    doc.select(&sel).filter_map(|a| a.value().attr("href")).map(|h| h.trim().to_string()).collect()
}

fn resolve_link(base: &Url, href: &str) -> Option<Url> {
    if href.is_empty() || href.starts_with('#') {
        return None;
    }
    let lower = href.to_ascii_lowercase();
    if lower.starts_with("mailto:") || lower.starts_with("javascript:") || lower.starts_with("tel:") {
        return None;
    }
    let mut url = base.join(href).ok()?;
    if !matches!(url.scheme(), "http" | "https") {
        return None;
    }
    url.set_fragment(None);
    Some(url)
}

fn same_site(a: &Url, b: &Url) -> bool {
    a.host_str() == b.host_str() && a.port_or_known_default() == b.port_or_known_default()
}

fn robots_disallow<F: Fetcher>(fetcher: &mut F, start: &Url) -> Vec<String> {
    let Ok(robots) = start.join("/robots.txt") else { return Vec::new() };
    match fetcher.fetch(&robots) {
        Ok(p) if p.status < 400 => parse_robots(&p.body),
        _ => Vec::new(),
    }
}

/// Disallow prefixes from the `User-agent: *` groups.
fn parse_robots(body: &str) -> Vec<String> {
    let mut out = BTreeSet::new();
    let mut agents: Vec<String> = Vec::new();
    let mut in_rules = false;
    for line in body.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        let Some((key, value)) = line.split_once(':') else { continue };
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        match key.as_str() {
            "user-agent" => {
                if in_rules {
                    agents.clear();
                    in_rules = false;
                }
                agents.push(value.to_string());
            }
            "disallow" | "allow" => {
                in_rules = true;
                if key == "disallow" && !value.is_empty() && agents.iter().any(|a| a == "*") {
                    out.insert(value.to_string());
                }
            }
            _ => {}
        }
    }
    out.into_iter().collect()
}

fn is_disallowed(prefixes: &[String], path: &str) -> bool {
    prefixes.iter().any(|p| path.starts_with(p.as_str()))
}
