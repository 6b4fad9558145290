use std::collections::BTreeMap;

use super::script::Link;
use super::{header_values, Header};

/// What a caching proxy may keep from one response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheDecision {
    pub store_body: bool,
    pub store_set_cookie: bool,
}

fn is_set_cookie(h: &Header) -> bool {
    h.is("Set-Cookie") || h.is("Set-Cookie2")
}

/// Cache directives are read from `Cache-Control`: `no-store` and `private`
/// keep the response out of the shared cache, and the extension directive
/// `cookie-shareable` is the only way an origin can let Set-Cookie headers
/// be cached along with the body.
pub fn cache_decision(response_headers: &[Header], body_cacheable: bool) -> CacheDecision {
    let directives: Vec<String> = header_values(response_headers, "Cache-Control")
        .flat_map(|v| v.split(','))
        .map(|d| d.trim().to_ascii_lowercase())
        .collect();
    let has = |name: &str| directives.iter().any(|d| d == name);
    let store_body = body_cacheable && !has("no-store") && !has("private");
    let store_set_cookie =
        store_body && has("cookie-shareable") && response_headers.iter().any(is_set_cookie);
    CacheDecision {
        store_body,
        store_set_cookie,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedResponse {
    pub headers: Vec<Header>,
    pub links: Vec<Link>,
    /// Client whose request filled the entry.
    pub stored_by: String,
}

impl CachedResponse {
    pub fn set_cookie_count(&self) -> usize {
        self.headers.iter().filter(|h| is_set_cookie(h)).count()
    }
}

/// A shared cache keyed by host, port and path.
#[derive(Debug, Clone, Default)]
pub struct ProxyCache {
    entries: BTreeMap<(String, u16, String), CachedResponse>,
}

impl ProxyCache {
    pub fn lookup(&self, host: &str, port: u16, path: &str) -> Option<&CachedResponse> {
        self.entries.get(&(host.to_string(), port, path.to_string()))
    }

    /// Stores a response under `decision`; returns the Set-Cookie headers
    /// that were left out of the cached copy.
    pub fn store(
        &mut self,
        key: (String, u16, String),
        headers: &[Header],
        links: &[Link],
        decision: CacheDecision,
        stored_by: &str,
    ) -> Vec<Header> {
        let (kept, stripped): (Vec<Header>, Vec<Header>) = headers
            .iter()
            .cloned()
            .partition(|h| !is_set_cookie(h) || decision.store_set_cookie);
        self.entries.insert(
            key,
            CachedResponse {
                headers: kept,
                links: links.to_vec(),
                stored_by: stored_by.to_string(),
            },
        );
        stripped
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(name: &str, value: &str) -> Header {
        Header::new(name, value)
    }

    #[test]
    fn decisions() {
        let product = [h("Set-Cookie", "Customer=custid"), h("Cache-Control", "public")];
        assert_eq!(
            cache_decision(&product, true),
            CacheDecision { store_body: true, store_set_cookie: false }
        );
        let shipping = [h("Set-Cookie", "Customer=custid"), h("Cache-Control", "no-store")];
        assert_eq!(
            cache_decision(&shipping, true),
            CacheDecision { store_body: false, store_set_cookie: false }
        );
        assert_eq!(
            cache_decision(&[], true),
            CacheDecision { store_body: true, store_set_cookie: false }
        );
        assert_eq!(
            cache_decision(&[h("Cache-Control", "private")], true),
            CacheDecision { store_body: false, store_set_cookie: false }
        );
        assert!(!cache_decision(&product, false).store_body);
        let opted_in = [h("Set-Cookie", "a=b"), h("Cache-Control", "public, Cookie-Shareable")];
        assert!(cache_decision(&opted_in, true).store_set_cookie);
    }

    #[test]
    fn store_strips_set_cookie() {
        let mut cache = ProxyCache::default();
        let headers = [h("Set-Cookie", "a=b"), h("Set-Cookie2", "c=d; Version=1"), h("X", "y")];
        let decision = cache_decision(&headers, true);
        let stripped = cache.store(("shop.com".into(), 80, "/".into()), &headers, &[], decision, "alice");
        assert_eq!(stripped.len(), 2);
        let entry = cache.lookup("shop.com", 80, "/").unwrap();
        assert_eq!(entry.set_cookie_count(), 0);
        assert_eq!(entry.headers, vec![h("X", "y")]);
    }
}
