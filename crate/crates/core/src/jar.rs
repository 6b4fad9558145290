//! The cookie jar: storage, replacement, expiry, selection and the
//! persistent cookie file.

use std::cmp::Reverse;
use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::date::UnixTime;
use crate::header::{Attribute, CookieSpec, PortSpec};
use crate::matching::{
    domain_match, effective_host, host_equals, path_match, port_match, validate_domain_v0,
    validate_domain_v1, DomainPattern, DomainRejection, DomainVerdict, HostName,
};
use crate::policy::RequestContext;

/// Source of the current time. The jar never reads the system clock.
pub trait Clock: Send + Sync {
    fn now(&self) -> UnixTime;
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub UnixTime);

impl Clock for FixedClock {
    fn now(&self) -> UnixTime {
        self.0
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicI64);

impl ManualClock {
    pub fn new(start: UnixTime) -> Self {
        ManualClock(AtomicI64::new(start))
    }

    pub fn set(&self, now: UnixTime) {
        self.0.store(now, Ordering::SeqCst);
    }

    pub fn advance(&self, secs: i64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> UnixTime {
        self.0.load(Ordering::SeqCst)
    }
}

/// Identity of a jar entry: a new cookie with the same key replaces the old.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CookieKey {
    pub name: String,
    pub domain: String,
    pub path: String,
}

impl fmt::Display for CookieKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};{}", self.name, self.domain, self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredCookie {
    pub spec: CookieSpec,
    pub origin_host: HostName,
    pub origin_port: u16,
    /// The Domain attribute in leading-dot form, or the origin host for
    /// host-only cookies.
    pub effective_domain: DomainPattern,
    pub effective_path: String,
    pub created_at: UnixTime,
    pub is_session: bool,
}

impl StoredCookie {
    /// Builds the jar entry for a cookie received in `ctx`.
    pub fn from_spec(spec: CookieSpec, ctx: &RequestContext, now: UnixTime) -> StoredCookie {
        let effective_domain = match &spec.domain {
            Some(d) => d.with_leading_dot(),
            None => DomainPattern::from_host(&effective_host(&ctx.host)),
        };
        let effective_path = spec
            .path
            .clone()
            .unwrap_or_else(|| default_path(&ctx.path).to_string());
        let is_session = session_flag(&spec);
        StoredCookie {
            spec,
            origin_host: ctx.host.clone(),
            origin_port: ctx.port,
            effective_domain,
            effective_path,
            created_at: now,
            is_session,
        }
    }

    pub fn key(&self) -> CookieKey {
        CookieKey {
            name: self.spec.name.clone(),
            domain: self.effective_domain.to_string(),
            path: self.effective_path.clone(),
        }
    }

    /// Only cookies that arrived with a Domain attribute tail-match.
    pub fn host_only(&self) -> bool {
        self.spec.domain.is_none()
    }

    /// When the cookie stops being valid. Max-Age wins over Expires for v1.
    pub fn expiry(&self) -> Option<UnixTime> {
        if self.spec.version >= 1 {
            if let Some(max_age) = self.spec.max_age {
                let max_age = i64::try_from(max_age).unwrap_or(i64::MAX);
                return Some(self.created_at.saturating_add(max_age));
            }
        }
        self.spec.expires
    }

    pub fn is_expired(&self, now: UnixTime) -> bool {
        self.expiry().is_some_and(|at| at <= now)
    }

    /// Host, path, port and channel checks; expiry is separate.
    pub fn matches(&self, ctx: &RequestContext) -> bool {
        let host_ok = if self.host_only() {
            host_equals(&ctx.host, &self.effective_domain)
        } else {
            domain_match(&ctx.host, &self.effective_domain)
        };
        host_ok
            && path_match(&ctx.path, &self.effective_path)
            && port_match(ctx.port, self.origin_port, &self.spec.port)
            && (!self.spec.secure || ctx.secure_channel)
    }
}

fn session_flag(spec: &CookieSpec) -> bool {
    match spec.version {
        0 => spec.expires.is_none(),
        _ => spec.max_age.is_none() || spec.discard,
    }
}

/// The directory part of a request path: everything before the last `/`.
pub fn default_path(request_path: &str) -> &str {
    match request_path.rfind('/') {
        Some(0) | None => "/",
        Some(i) => &request_path[..i],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreRejection {
    InvalidDomain(DomainRejection),
    /// The Port list does not include the port the cookie came from.
    PortNotListed,
}

impl fmt::Display for StoreRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreRejection::InvalidDomain(r) => write!(f, "InvalidDomain({r})"),
            StoreRejection::PortNotListed => f.write_str("PortNotListed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreResult {
    Stored,
    Replaced,
    /// An already-expired cookie removed its same-key predecessor.
    Deleted,
    /// An already-expired cookie with nothing to delete.
    ExpiredOnArrival,
    Rejected(StoreRejection),
}

impl fmt::Display for StoreResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreResult::Stored => f.write_str("Stored"),
            StoreResult::Replaced => f.write_str("Replaced"),
            StoreResult::Deleted => f.write_str("Deleted"),
            StoreResult::ExpiredOnArrival => f.write_str("ExpiredOnArrival"),
            StoreResult::Rejected(r) => write!(f, "Rejected({r})"),
        }
    }
}

/// Soft storage caps. The oldest cookie is evicted first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JarLimits {
    pub max_total: usize,
    pub max_per_domain: usize,
}

impl Default for JarLimits {
    fn default() -> Self {
        JarLimits {
            max_total: 300,
            max_per_domain: 20,
        }
    }
}

pub struct Jar {
    entries: IndexMap<CookieKey, StoredCookie>,
    clock: Arc<dyn Clock>,
    limits: JarLimits,
}

impl fmt::Debug for Jar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jar")
            .field("entries", &self.entries)
            .field("limits", &self.limits)
            .finish()
    }
}

impl Clone for Jar {
    fn clone(&self) -> Self {
        Jar {
            entries: self.entries.clone(),
            clock: Arc::clone(&self.clock),
            limits: self.limits,
        }
    }
}

/// Two jars are equal when they hold the same entries in the same order.
impl PartialEq for Jar {
    fn eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(other.entries.iter()).all(|(a, b)| a == b)
    }
}

impl Jar {
    pub fn new(clock: Arc<dyn Clock>) -> Jar {
        Jar::with_limits(clock, JarLimits::default())
    }

    pub fn with_limits(clock: Arc<dyn Clock>, limits: JarLimits) -> Jar {
        Jar {
            entries: IndexMap::new(),
            clock,
            limits,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in creation order.
    pub fn iter(&self) -> impl Iterator<Item = &StoredCookie> {
        self.entries.values()
    }

    pub fn get(&self, key: &CookieKey) -> Option<&StoredCookie> {
        self.entries.get(key)
    }

    pub fn now(&self) -> UnixTime {
        self.clock.now()
    }

    /// Stores a cookie received in `ctx`, replacing any entry with the same
    /// name, domain and path.
    pub fn store(&mut self, spec: CookieSpec, ctx: &RequestContext) -> StoreResult {
        if let Some(domain) = &spec.domain {
            let verdict = match spec.version {
                0 => validate_domain_v0(&ctx.host, domain),
                _ => validate_domain_v1(&ctx.host, domain),
            };
            if let DomainVerdict::Reject(reason) = verdict {
                return StoreResult::Rejected(StoreRejection::InvalidDomain(reason));
            }
        }
        if let PortSpec::PortList { ports, .. } = &spec.port {
            if !ports.contains(&ctx.port) {
                return StoreResult::Rejected(StoreRejection::PortNotListed);
            }
        }

        let now = self.clock.now();
        let cookie = StoredCookie::from_spec(spec, ctx, now);
        let key = cookie.key();
        let dead = (cookie.spec.version >= 1 && cookie.spec.max_age == Some(0)) || cookie.is_expired(now);
        if dead {
            return match self.entries.shift_remove(&key) {
                Some(_) => StoreResult::Deleted,
                None => StoreResult::ExpiredOnArrival,
            };
        }

        let replaced = self.entries.shift_remove(&key).is_some();
        let domain = key.domain.clone();
        self.entries.insert(key, cookie);
        self.enforce_limits(&domain);
        if replaced {
            StoreResult::Replaced
        } else {
            StoreResult::Stored
        }
    }

    fn enforce_limits(&mut self, domain: &str) {
        while self.entries.values().filter(|c| c.key().domain == domain).count() > self.limits.max_per_domain {
            self.evict_oldest(|c| c.key().domain == domain);
        }
        while self.entries.len() > self.limits.max_total {
            self.evict_oldest(|_| true);
        }
    }

    fn evict_oldest(&mut self, filter: impl Fn(&StoredCookie) -> bool) {
        let oldest = self
            .entries
            .iter()
            .filter(|(_, c)| filter(c))
            .min_by_key(|(_, c)| c.created_at)
            .map(|(k, _)| k.clone());
        if let Some(key) = oldest {
            self.entries.shift_remove(&key);
        }
    }

    /// Cookies to send in `ctx`, most specific path first; equal path
    /// lengths keep creation order.
    pub fn select(&self, ctx: &RequestContext, now: UnixTime) -> Vec<StoredCookie> {
        let mut out: Vec<StoredCookie> = self
            .entries
            .values()
            .filter(|c| !c.is_expired(now) && c.matches(ctx))
            .cloned()
            .collect();
        out.sort_by_key(|c| (Reverse(c.effective_path.len()), c.created_at));
        out
    }

    pub fn purge_expired(&mut self, now: UnixTime) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, c| !c.is_expired(now));
        before - self.entries.len()
    }

    /// Drops session cookies and anything marked Discard.
    pub fn end_session(&mut self) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, c| !(c.is_session || c.spec.discard));
        before - self.entries.len()
    }

    /// Writes the persistent cookies in the cookie-file format. Session
    /// cookies are never written.
    pub fn save(&self) -> String {
        let mut out = String::from(FILE_HEADER);
        for cookie in self.entries.values().filter(|c| !c.is_session) {
            out.push_str(&encode_line(cookie));
            out.push('\n');
        }
        out
    }

    pub fn load(text: &str, clock: Arc<dyn Clock>) -> Result<Jar, LoadError> {
        let mut jar = Jar::new(clock);
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cookie = decode_line(line, line_no)?;
            let key = cookie.key();
            if jar.entries.insert(key, cookie).is_some() {
                return Err(LoadError::Malformed {
                    line: line_no,
                    reason: "duplicate cookie key".into(),
                });
            }
        }
        Ok(jar)
    }
}

// ---------------------------------------------------------------------------
// cookie file

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unsupported cookie version {found:?}")]
    BadVersion { line: usize, found: String },
}

pub const FILE_HEADER: &str = "# statejar cookie file, format 1\n\
# version\tname\tvalue\tdomain\tpath\texpires\tmax_age\tsecure\tdiscard\tport\tcomment\tcomment_url\torigin_host\torigin_port\teffective_domain\teffective_path\tcreated_at\t[extras...]\n";

const FIXED_COLUMNS: usize = 17;

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    if out == "-" {
        out = "\\-".to_string();
    }
    out
}

pub(crate) fn unescape(text: &str) -> Result<String, String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('-') => out.push('-'),
            other => return Err(format!("bad escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

fn opt_text(value: Option<&str>) -> String {
    value.map(escape).unwrap_or_else(|| "-".to_string())
}

fn flag(value: bool) -> &'static str {
    if value {
        "TRUE"
    } else {
        "FALSE"
    }
}

fn encode_line(c: &StoredCookie) -> String {
    let s = &c.spec;
    let port = match &s.port {
        PortSpec::AnyPort => "-".to_string(),
        PortSpec::SamePortOnly => "same".to_string(),
        PortSpec::PortList { raw, .. } => escape(raw),
    };
    let mut cols = vec![
        s.version.to_string(),
        escape(&s.name),
        escape(&s.value),
        opt_text(s.domain.as_ref().map(|d| d.to_string()).as_deref()),
        opt_text(s.path.as_deref()),
        s.expires.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
        s.max_age.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
        flag(s.secure).to_string(),
        flag(s.discard).to_string(),
        port,
        opt_text(s.comment.as_deref()),
        opt_text(s.comment_url.as_deref()),
        c.origin_host.to_string(),
        c.origin_port.to_string(),
        c.effective_domain.to_string(),
        escape(&c.effective_path),
        c.created_at.to_string(),
    ];
    for extra in &s.extras {
        cols.push(match &extra.value {
            Some(v) => escape(&format!("{}={}", extra.name, v)),
            None => escape(&extra.name),
        });
    }
    cols.join("\t")
}

fn decode_line(line: &str, line_no: usize) -> Result<StoredCookie, LoadError> {
    let bad = |reason: String| LoadError::Malformed { line: line_no, reason };
    let cols: Vec<&str> = line.split('\t').collect();
    let version: u8 = match cols[0] {
        "0" => 0,
        "1" => 1,
        other => {
            return Err(LoadError::BadVersion {
                line: line_no,
                found: other.to_string(),
            })
        }
    };
    if cols.len() < FIXED_COLUMNS {
        return Err(bad(format!("expected at least {FIXED_COLUMNS} fields, found {}", cols.len())));
    }
    let text = |i: usize| unescape(cols[i]).map_err(&bad);
    let opt = |i: usize| -> Result<Option<String>, LoadError> {
        if cols[i] == "-" {
            Ok(None)
        } else {
            text(i).map(Some)
        }
    };
    let num = |i: usize, what: &str| -> Result<Option<i64>, LoadError> {
        if cols[i] == "-" {
            return Ok(None);
        }
        cols[i].parse().map(Some).map_err(|_| bad(format!("bad {what} {:?}", cols[i])))
    };
    let boolean = |i: usize, what: &str| match cols[i] {
        "TRUE" => Ok(true),
        "FALSE" => Ok(false),
        other => Err(bad(format!("bad {what} flag {other:?}"))),
    };

    let mut spec = CookieSpec::new(text(1)?, text(2)?, version);
    spec.domain = opt(3)?
        .map(|d| DomainPattern::parse(&d).map_err(|e| bad(e.to_string())))
        .transpose()?;
    spec.path = opt(4)?;
    spec.expires = num(5, "expires")?;
    spec.max_age = num(6, "max_age")?
        .map(|v| u64::try_from(v).map_err(|_| bad("negative max_age".into())))
        .transpose()?;
    spec.secure = boolean(7, "secure")?;
    spec.discard = boolean(8, "discard")?;
    spec.port = match cols[9] {
        "-" => PortSpec::AnyPort,
        "same" => PortSpec::SamePortOnly,
        raw => PortSpec::parse_list(&unescape(raw).map_err(&bad)?).map_err(|e| bad(e.to_string()))?,
    };
    spec.comment = opt(10)?;
    spec.comment_url = opt(11)?;
    for col in &cols[FIXED_COLUMNS..] {
        let raw = unescape(col).map_err(&bad)?;
        spec.extras.push(match raw.split_once('=') {
            Some((n, v)) => Attribute {
                name: n.to_string(),
                value: Some(v.to_string()),
            },
            None => Attribute { name: raw, value: None },
        });
    }

    let origin_host = HostName::parse(cols[12]).map_err(|e| bad(e.to_string()))?;
    let origin_port: u16 = cols[13].parse().map_err(|_| bad(format!("bad origin_port {:?}", cols[13])))?;
    let effective_domain = DomainPattern::parse(cols[14]).map_err(|e| bad(e.to_string()))?;
    let effective_path = text(15)?;
    let created_at = num(16, "created_at")?.ok_or_else(|| bad("created_at is required".into()))?;
    let is_session = session_flag(&spec);
    Ok(StoredCookie {
        spec,
        origin_host,
        origin_port,
        effective_domain,
        effective_path,
        created_at,
        is_session,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::header::{parse_set_cookie, Mode};

    fn jar_at(now: UnixTime) -> (Jar, Arc<ManualClock>) {
        let clock = Arc::new(ManualClock::new(now));
        (Jar::new(clock.clone()), clock)
    }

    fn ctx(url: &str) -> RequestContext {
        RequestContext::from_url(url).unwrap()
    }

    fn v0(text: &str) -> CookieSpec {
        parse_set_cookie(text, Mode::V0).unwrap().remove(0)
    }

    fn v1(text: &str) -> CookieSpec {
        parse_set_cookie(text, Mode::V1).unwrap().remove(0)
    }

    #[test]
    fn default_paths() {
        assert_eq!(default_path("/bar/page"), "/bar");
        assert_eq!(default_path("/page"), "/");
        assert_eq!(default_path("/"), "/");
        assert_eq!(default_path("/a/b/"), "/a/b");
        assert_eq!(default_path(""), "/");
    }

    #[test]
    fn store_replace_delete() {
        let (mut jar, _) = jar_at(1000);
        let site = ctx("http://www.shop.com/");
        assert_eq!(jar.store(v0("a=1; path=/"), &site), StoreResult::Stored);
        assert_eq!(jar.len(), 1);
        assert_eq!(jar.store(v0("a=2; path=/"), &site), StoreResult::Replaced);
        assert_eq!(jar.len(), 1);
        assert_eq!(jar.iter().next().unwrap().spec.value, "2");

        assert_eq!(jar.store(v1("a=3; Path=/; Max-Age=0; Version=1"), &site), StoreResult::Deleted);
        assert_eq!(jar.len(), 0);
        assert_eq!(jar.store(v1("a=3; Path=/; Max-Age=0; Version=1"), &site), StoreResult::ExpiredOnArrival);

        jar.store(v0("b=1; path=/"), &site);
        let past = v0("b=1; path=/; expires=Thu, 01 Jan 1970 00:00:00 GMT");
        assert_eq!(jar.store(past, &site), StoreResult::Deleted);
        assert!(jar.is_empty());
    }

    #[test]
    fn store_validates_domain_and_port() {
        let (mut jar, _) = jar_at(0);
        let site = ctx("http://www.shop.com/");
        assert_eq!(
            jar.store(v0("a=1; domain=.com"), &site),
            StoreResult::Rejected(StoreRejection::InvalidDomain(DomainRejection::TooBroad))
        );
        let site = ctx("http://a.b.example.com/");
        assert_eq!(
            jar.store(v1("a=1; Domain=.example.com; Version=1"), &site),
            StoreResult::Rejected(StoreRejection::InvalidDomain(DomainRejection::TooManyLevels))
        );
        let site = ctx("http://b.example.com:8080/");
        assert_eq!(
            jar.store(v1("a=1; Port=\"80,443\"; Version=1"), &site),
            StoreResult::Rejected(StoreRejection::PortNotListed)
        );
    }

    #[test]
    fn select_orders_by_path_specificity() {
        let (mut jar, clock) = jar_at(10);
        let site = ctx("http://www.shop.com/");
        jar.store(v0("name1=foo; path=/"), &site);
        clock.advance(1);
        jar.store(v0("name1=foo2; path=/bar"), &site);
        let sent = jar.select(&ctx("http://www.shop.com/bar/x"), 20);
        let values: Vec<&str> = sent.iter().map(|c| c.spec.value.as_str()).collect();
        assert_eq!(values, ["foo2", "foo"]);
    }

    #[test]
    fn secure_and_host_only() {
        let (mut jar, _) = jar_at(0);
        jar.store(v0("s=1; secure; path=/"), &ctx("https://shop.com/"));
        jar.store(v0("h=1; path=/"), &ctx("https://shop.com/"));
        assert!(jar.select(&ctx("http://shop.com/"), 0).iter().all(|c| c.spec.name != "s"));
        assert_eq!(jar.select(&ctx("https://shop.com/"), 0).len(), 2);
        // host-only cookies stay on the origin host
        assert!(jar.select(&ctx("https://www.shop.com/"), 0).is_empty());
    }

    #[test]
    fn expiry_and_sessions() {
        let (mut jar, _) = jar_at(100);
        let site = ctx("http://www.shop.com/");
        jar.store(v0("exp=1; path=/; expires=Thu, 01 Jan 1970 00:03:20 GMT"), &site); // t=200
        jar.store(v1("age=1; Path=/; Max-Age=15552000; Version=1"), &site);
        jar.store(v0("sess=1; path=/"), &site);
        jar.store(v1("disc=1; Path=/; Max-Age=99999999; Discard; Version=1"), &site);
        assert_eq!(jar.len(), 4);

        assert_eq!(jar.purge_expired(199), 0);
        assert_eq!(jar.purge_expired(200), 1);
        assert_eq!(jar.purge_expired(100 + 15_552_001), 1);
        assert_eq!(jar.len(), 2);
        assert_eq!(jar.end_session(), 2);
        assert_eq!(jar.end_session(), 0);
    }

    #[test]
    fn discard_overrides_max_age() {
        let (mut jar, _) = jar_at(0);
        let site = ctx("http://www.shop.com/");
        jar.store(v1("keep=1; Path=/; Max-Age=9999999; Version=1"), &site);
        jar.store(v1("drop=1; Path=/; Max-Age=9999999; Discard; Version=1"), &site);
        jar.store(v0("dated=1; path=/; expires=Fri, 01 Jan 2100 00:00:00 GMT"), &site);
        assert_eq!(jar.end_session(), 1);
        let names: Vec<&str> = jar.iter().map(|c| c.spec.name.as_str()).collect();
        assert_eq!(names, ["keep", "dated"]);
    }

    #[test]
    fn limits_evict_oldest() {
        let clock = Arc::new(ManualClock::new(0));
        let mut jar = Jar::with_limits(clock.clone(), JarLimits { max_total: 3, max_per_domain: 2 });
        let site = ctx("http://www.shop.com/");
        for name in ["a", "b", "c"] {
            jar.store(v0(&format!("{name}=1; path=/")), &site);
            clock.advance(1);
        }
        let names: Vec<&str> = jar.iter().map(|c| c.spec.name.as_str()).collect();
        assert_eq!(names, ["b", "c"]);
        for host in ["http://x.org/", "http://y.org/"] {
            jar.store(v0("z=1; path=/"), &ctx(host));
            clock.advance(1);
        }
        assert_eq!(jar.len(), 3);
        assert!(jar.iter().all(|c| c.spec.name != "b"));
    }

    #[test]
    fn save_skips_sessions_and_round_trips() {
        let (mut jar, clock) = jar_at(5000);
        let site = ctx("http://b.example.com:8080/shop/cart");
        jar.store(v0("sess=1"), &site);
        jar.store(
            v1("xx=\"1=2&3-4\"; Comment=\"tab\there\"; Domain=.example.com; Max-Age=60; Port=\"8080, 80\"; Version=1; Odd=\"-\"; Flag"),
            &site,
        );
        let text = jar.save();
        assert!(!text.contains("sess"));
        let loaded = Jar::load(&text, clock).unwrap();
        assert_eq!(loaded.len(), 1);
        let mut persistent = jar.clone();
        persistent.end_session();
        assert_eq!(loaded, persistent);
    }

    #[test]
    fn load_errors() {
        let clock: Arc<dyn Clock> = Arc::new(FixedClock(0));
        assert_eq!(Jar::load(FILE_HEADER, clock.clone()).unwrap().len(), 0);
        let err = Jar::load("# c\n\n2\ta\tb", clock.clone()).unwrap_err();
        assert_eq!(err, LoadError::BadVersion { line: 3, found: "2".into() });
        let err = Jar::load("0\ta\tb", clock.clone()).unwrap_err();
        assert!(matches!(err, LoadError::Malformed { line: 1, .. }));
        let line = "0\ta\tb\t-\t-\tnope\t-\tFALSE\tFALSE\t-\t-\t-\tx.com\t80\tx.com\t/\t0";
        assert!(matches!(Jar::load(line, clock), Err(LoadError::Malformed { line: 1, .. })));
    }
}
