//! URL pattern normalization.
//!
//! Concrete request URIs collapse onto patterns so that `/page?id=1` and
//! `/page?id=2` become the same site map node, `/page?id=*`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Canonical pattern text: normalized path plus sorted, wildcarded query keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UrlPattern(String);

impl UrlPattern {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for UrlPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for UrlPattern {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UrlPatternError {
    #[error("invalid uri {0:?}: must begin with '/'")]
    InvalidUri(String),
}

/// Normalizes a request URI (path plus optional query) into its pattern.
///
/// Fragments are dropped, a trailing slash is removed except on the root,
/// every query value becomes `*` with keys deduplicated and sorted, and path
/// segments that look like identifiers (all digits, hex of length 8 or more,
/// or a UUID) become `*`. Percent-escapes are lowercased.
pub fn normalize(uri: &str) -> Result<UrlPattern, UrlPatternError> {
    if !uri.starts_with('/') {
        return Err(UrlPatternError::InvalidUri(uri.into()));
    }
    let uri = uri.split('#').next().unwrap_or("");
    let (path, query) = match uri.split_once('?') {
        Some((p, q)) => (p, Some(q)),
        None => (uri, None),
    };

    let mut out = String::with_capacity(uri.len());
    let trimmed = path.trim_end_matches('/');
    if trimmed.is_empty() {
        out.push('/');
    } else {
        // trimmed starts with '/', so the first split item is empty
        for seg in trimmed.split('/').skip(1) {
            out.push('/');
            let seg = lower_escapes(seg);
            if is_identifier(&seg) {
                out.push('*');
            } else {
                out.push_str(&seg);
            }
        }
    }

    if let Some(query) = query {
        let keys: BTreeSet<String> = query
            .split('&')
            .filter(|kv| !kv.is_empty())
            .map(|kv| lower_escapes(kv.split_once('=').map_or(kv, |(k, _)| k)))
            .filter(|k| !k.is_empty())
            .collect();
        for (i, key) in keys.iter().enumerate() {
            out.push(if i == 0 { '?' } else { '&' });
            out.push_str(key);
            out.push_str("=*");
        }
    }
    Ok(UrlPattern(out))
}

fn lower_escapes(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%'
            && i + 2 < bytes.len()
            && bytes[i + 1].is_ascii_hexdigit()
            && bytes[i + 2].is_ascii_hexdigit()
        {
            out.push(b'%');
            out.push(bytes[i + 1].to_ascii_lowercase());
            out.push(bytes[i + 2].to_ascii_lowercase());
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    // only ASCII hex digits were touched
    String::from_utf8(out).expect("ascii-only edits keep utf-8 valid")
}

fn is_identifier(seg: &str) -> bool {
    if seg.is_empty() {
        return false;
    }
    let b = seg.as_bytes();
    if b.iter().all(u8::is_ascii_digit) {
        return true;
    }
    if b.len() >= 8 && b.iter().all(u8::is_ascii_hexdigit) {
        return true;
    }
    is_uuid(b)
}

fn is_uuid(b: &[u8]) -> bool {
    b.len() == 36
        && b.iter().enumerate().all(|(i, c)| match i {
            8 | 13 | 18 | 23 => *c == b'-',
            _ => c.is_ascii_hexdigit(),
        })
}
