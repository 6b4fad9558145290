//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use statejar::header::Attribute;
use statejar::jar::StoredCookie;
use statejar::sim::{EventKind, TraceEvent};
use statejar::matching::{validate_domain_v1, DomainRejection, DomainVerdict};
use statejar::{CookieSpec, DomainPattern, HostName, Jar, ManualClock, PortSpec, RequestContext, StoreResult, UnixTime};

// ---------------------------------------------------------------------------
// string-level oracles

/// A host name with `.local` appended when it has no dot.
pub fn eff(host: &str) -> String {
    let host = host.to_ascii_lowercase();
    if host.contains('.') {
        host
    } else {
        format!("{host}.local")
    }
}

/// Label-boundary tail match of an effective host against dotless domain text.
pub fn tail_match(eff_host: &str, domain: &str) -> bool {
    eff_host == domain || eff_host.ends_with(&format!(".{domain}"))
}

/// Whether `host` lies within the reach of `origin`.
pub fn within_reach(host: &str, origin: &str) -> bool {
    let origin = eff(origin);
    let host = eff(host);
    match origin.split_once('.') {
        Some((_, rest)) if rest.contains('.') || rest == "local" => tail_match(&host, rest),
        _ => tail_match(&host, &origin),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V1Verdict {
    Accept,
    TooBroad,
    NotTailMatch,
    TooManyLevels,
}

/// The Set-Cookie2 Domain rules, written from their prose statement.
pub fn v1_domain_oracle(host: &str, domain: &str) -> V1Verdict {
    let d = domain.strip_prefix('.').unwrap_or(domain);
    if !d.contains('.') && d != "local" {
        return V1Verdict::TooBroad;
    }
    let h = eff(host);
    if !tail_match(&h, d) {
        return V1Verdict::NotTailMatch;
    }
    let prefix = h.strip_suffix(d).unwrap_or("").trim_end_matches('.');
    if prefix.contains('.') {
        return V1Verdict::TooManyLevels;
    }
    V1Verdict::Accept
}

/// Directory part of a request path.
pub fn dir_of(path: &str) -> String {
    match path.rfind('/') {
        Some(0) | None => "/".to_string(),
        Some(i) => path[..i].to_string(),
    }
}

pub struct Query<'a> {
    pub host: &'a str,
    pub port: u16,
    pub path: &'a str,
    pub https: bool,
    pub now: UnixTime,
}

/// Jar key computed from the store request: (name, domain, path).
pub fn model_key(spec: &CookieSpec, host: &str, request_path: &str) -> (String, String, String) {
    let domain = match &spec.domain {
        Some(d) => format!(".{}", d.text()),
        None => eff(host),
    };
    let path = spec.path.clone().unwrap_or_else(|| dir_of(request_path));
    (spec.name.clone(), domain, path)
}

/// Whether a stored cookie should be sent for `q`, recomputed from the
/// cookie's attributes, origin host/port and the path of the request that
/// set it.
pub fn oracle_selects(c: &StoredCookie, origin_path: &str, q: &Query<'_>) -> bool {
    let spec = &c.spec;
    let host = eff(q.host);
    let host_ok = match &spec.domain {
        Some(d) => tail_match(&host, d.text()),
        None => host == eff(&c.origin_host.to_string()),
    };
    let cookie_path = spec.path.clone().unwrap_or_else(|| dir_of(origin_path));
    let path_ok = q.path.starts_with(&cookie_path);
    let port_ok = match &spec.port {
        PortSpec::AnyPort => true,
        PortSpec::SamePortOnly => q.port == c.origin_port,
        PortSpec::PortList { ports, .. } => ports.contains(&q.port),
    };
    let secure_ok = !spec.secure || q.https;
    let alive = match (spec.version, spec.max_age, spec.expires) {
        (1, Some(age), _) => (c.created_at as i128 + age as i128) > q.now as i128,
        (_, _, Some(at)) => at > q.now,
        _ => true,
    };
    host_ok && path_ok && port_ok && secure_ok && alive
}

// ---------------------------------------------------------------------------
// CookieSpec strategies

const V0_VALUE: &str = "[A-Za-z0-9!#%&'*+./:=?@^_`|~-]{0,10}";

pub fn name_strategy() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_.-]{0,7}"
}

fn domain_strategy() -> impl Strategy<Value = DomainPattern> {
    (prop::collection::vec("[a-z][a-z0-9-]{0,3}", 1..=3), any::<bool>()).prop_map(|(labels, dot)| {
        let text = format!("{}{}", if dot { "." } else { "" }, labels.join("."));
        DomainPattern::parse(&text).expect("generated domain parses")
    })
}

fn expires_strategy() -> impl Strategy<Value = UnixTime> {
    0i64..253_402_300_799
}

fn extras_strategy(value: &'static str) -> impl Strategy<Value = Vec<Attribute>> {
    prop::collection::vec(
        ("X-[A-Za-z0-9]{0,5}", prop::option::of(value)).prop_map(|(name, value)| Attribute { name, value }),
        0..3,
    )
}

pub fn v0_spec_strategy() -> impl Strategy<Value = CookieSpec> {
    (
        name_strategy(),
        V0_VALUE,
        prop::option::of(domain_strategy()),
        prop::option::of("/[a-z0-9/]{0,8}"),
        prop::option::of(expires_strategy()),
        any::<bool>(),
        extras_strategy("[A-Za-z0-9=/.-]{0,6}"),
    )
        .prop_map(|(name, value, domain, path, expires, secure, extras)| {
            let mut spec = CookieSpec::new(name, value, 0);
            spec.domain = domain;
            spec.path = path;
            spec.expires = expires;
            spec.secure = secure;
            spec.extras = extras;
            spec
        })
}

fn port_strategy() -> impl Strategy<Value = PortSpec> {
    prop_oneof![
        Just(PortSpec::AnyPort),
        Just(PortSpec::SamePortOnly),
        prop::collection::vec(1u16.., 1..4).prop_map(|p| PortSpec::list(p).expect("nonzero ports")),
    ]
}

pub fn v1_spec_strategy() -> impl Strategy<Value = CookieSpec> {
    let value = prop_oneof![V0_VALUE.prop_map(String::from), "[ -~]{0,10}".prop_map(|s| statejar::header::quote(&s)),];
    (
        (name_strategy(), value, prop::option::of(domain_strategy()), prop::option::of("/[a-zA-Z0-9 ;,=/\"]{0,8}")),
        (prop::option::of(expires_strategy()), prop::option::of(any::<u64>()), any::<bool>(), any::<bool>()),
        (prop::option::of("[ -~]{0,12}"), prop::option::of("[ -~]{0,12}"), port_strategy()),
        extras_strategy("[A-Za-z0-9=/.-]{0,6}"),
    )
        .prop_map(
            |((name, value, domain, path), (expires, max_age, discard, secure), (comment, comment_url, port), extras)| {
                let mut spec = CookieSpec::new(name, value, 1);
                spec.domain = domain;
                spec.path = path;
                spec.expires = expires;
                spec.max_age = max_age;
                spec.discard = discard;
                spec.secure = secure;
                spec.comment = comment;
                spec.comment_url = comment_url;
                spec.port = port;
                spec.extras = extras;
                spec
            },
        )
}

pub fn any_spec_strategy() -> impl Strategy<Value = CookieSpec> {
    prop_oneof![v0_spec_strategy(), v1_spec_strategy()]
}

// ---------------------------------------------------------------------------
// random jars

pub const JAR_HOSTS: [&str; 8] = [
    "a.com",
    "www.a.com",
    "x.www.a.com",
    "b.org",
    "intranet",
    "c.ac.uk",
    "d.c.ac.uk",
    "notla.com",
];
pub const JAR_PATHS: [&str; 6] = ["/", "/a", "/a/", "/a/b", "/ab", "/a/b/c.html"];
pub const JAR_PORTS: [u16; 3] = [80, 443, 8080];
const JAR_DOMAINS: [&str; 8] = [".a.com", "a.com", ".www.a.com", ".c.ac.uk", ".local", ".org", ".com", "la.com"];

/// One store operation: (spec, host, port, path, https, seconds to advance first).
pub type StoreOp = (CookieSpec, &'static str, u16, &'static str, bool, i64);

pub fn store_op_strategy() -> impl Strategy<Value = StoreOp> {
    (
        (0usize..4, 0u8..2, 0u32..1000, prop::option::of(0usize..JAR_DOMAINS.len())),
        (prop::option::of(0usize..JAR_PATHS.len()), prop::option::of(-50i64..200), prop::option::of(0u64..200), any::<bool>()),
        (0usize..3, 0usize..JAR_HOSTS.len(), 0usize..JAR_PORTS.len(), 0usize..JAR_PATHS.len(), any::<bool>(), 0i64..3),
    )
        .prop_map(
            |((name, version, value, domain), (path, expires, max_age, secure), (port_kind, host, port, req_path, https, advance))| {
                let mut spec = CookieSpec::new(format!("n{name}"), value.to_string(), version);
                spec.domain = domain.map(|d| DomainPattern::parse(JAR_DOMAINS[d]).unwrap());
                spec.path = path.map(|p| JAR_PATHS[p].to_string());
                spec.expires = expires.map(|e| 1000 + e);
                spec.secure = secure;
                if version == 1 {
                    spec.max_age = max_age;
                    spec.port = match port_kind {
                        0 => PortSpec::AnyPort,
                        1 => PortSpec::SamePortOnly,
                        _ => PortSpec::list(vec![80, 8080]).unwrap(),
                    };
                }
                (spec, JAR_HOSTS[host], JAR_PORTS[port], JAR_PATHS[req_path], https, advance)
            },
        )
}

// ---------------------------------------------------------------------------
// random exchange scripts

const SIM_HOSTS: [&str; 12] = [
    "www.news.com",
    "images.news.com",
    "www.ads.com",
    "track.ads.com",
    "shop.biz.com",
    "info.biz.com",
    "www.ucl.ac.uk",
    "cs.ucl.ac.uk",
    "intranet",
    "wiki",
    "ads.example.org",
    "www.example.org",
];
const SIM_PATHS: [&str; 5] = ["/", "/a", "/a/b", "/img/x.gif", "/cart"];
const SIM_NAMES: [&str; 5] = ["id", "ad", "sess", "Customer", "pref"];
const SIM_DOMAINS: [&str; 10] = [
    ".news.com",
    ".ads.com",
    ".biz.com",
    "biz.com",
    ".com",
    ".local",
    ".ucl.ac.uk",
    ".example.org",
    ".ac.uk",
    ".org",
];

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty")
}

fn url(rng: &mut ChaCha8Rng) -> String {
    let scheme = if rng.gen_bool(0.15) { "https" } else { "http" };
    format!("{scheme}://{}{}", pick(rng, &SIM_HOSTS), pick(rng, &SIM_PATHS))
}

fn set_cookie_line(rng: &mut ChaCha8Rng) -> String {
    let v1 = rng.gen_bool(0.4);
    let mut text = format!("{}={}", pick(rng, &SIM_NAMES), rng.gen_range(0..100));
    if rng.gen_bool(0.5) {
        text.push_str(&format!("; Domain={}", pick(rng, &SIM_DOMAINS)));
    }
    if rng.gen_bool(0.6) {
        text.push_str(&format!("; Path={}", pick(rng, &["/", "/a", "/img"])));
    }
    if v1 {
        if rng.gen_bool(0.5) {
            text.push_str(&format!("; Max-Age={}", rng.gen_range(0..5000)));
        }
        if rng.gen_bool(0.1) {
            text.push_str("; Port=\"80,443\"");
        }
        if rng.gen_bool(0.1) {
            text.push_str("; Discard");
        }
        text.push_str("; Version=1");
        format!("header Set-Cookie2: {text}")
    } else {
        if rng.gen_bool(0.3) {
            text.push_str("; expires=Fri, 31 Dec 1999 23:59:59 GMT");
        }
        format!("header Set-Cookie: {text}")
    }
}

fn response_body(rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
    match rng.gen_range(0..6) {
        0 => out.push("header Cache-Control: no-store".into()),
        1 => out.push("header Cache-Control: private".into()),
        2 => out.push("header Cache-Control: public, max-age=60".into()),
        _ => {}
    }
    for _ in 0..rng.gen_range(0..3) {
        out.push(set_cookie_line(rng));
    }
    for _ in 0..rng.gen_range(0..3) {
        let trigger = pick(rng, &["inline", "inline", "redirect", "form"]);
        out.push(format!("link {trigger} {}", url(rng)));
    }
}

/// A random but well-formed exchange script. The cookie-shareable cache
/// directive is never produced.
pub fn random_script(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let clients: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("c{i}")).collect();
    for c in &clients {
        out.push(format!("client {c} {}", pick(&mut rng, &["rfc2965", "rfc2965", "navigator3", "msie3"])));
    }
    for host in SIM_HOSTS {
        match rng.gen_range(0..4) {
            0 => out.push(format!("server {host} v0")),
            1 | 2 => out.push(format!("server {host} v1")),
            _ => {}
        }
    }
    let proxy = rng.gen_bool(0.7);
    if proxy {
        out.push("proxy p".into());
    }
    for _ in 0..rng.gen_range(0..6) {
        out.push(format!("serve {} {}", pick(&mut rng, &SIM_HOSTS), pick(&mut rng, &["/", "/img", "/a"])));
        response_body(&mut rng, &mut out);
    }

    let mut requests: Vec<(usize, String)> = Vec::new();
    let mut step = 0;
    for _ in 0..rng.gen_range(2..14) {
        match rng.gen_range(0..10) {
            0 => {
                out.push(format!("advance {}", rng.gen_range(1..4000)));
                step += 1;
            }
            1 => {
                out.push(format!("end-session {}", pick(&mut rng, &clients)));
                step += 1;
            }
            _ => {
                let client = pick(&mut rng, &clients).clone();
                let mut line = format!("request {client} {}", url(&mut rng));
                if proxy && rng.gen_bool(0.6) {
                    line.push_str(" via=p");
                }
                let own: Vec<usize> = requests.iter().filter(|(_, c)| *c == client).map(|(s, _)| *s).collect();
                if !own.is_empty() && rng.gen_bool(0.25) {
                    let from = pick(&mut rng, &own);
                    line.push_str(&format!(" from={from} trigger={}", pick(&mut rng, &["inline", "redirect", "form"])));
                }
                out.push(line);
                requests.push((step, client));
                step += 1;
                if rng.gen_bool(0.7) {
                    out.push(if rng.gen_bool(0.15) { "response uncacheable".into() } else { "response".into() });
                    response_body(&mut rng, &mut out);
                    step += 1;
                }
            }
        }
    }
    out.push(String::new());
    out.join("\n")
}

// ---------------------------------------------------------------------------
// trace checks

/// Events that put a cookie into a jar.
pub fn is_store(kind: &EventKind) -> bool {
    matches!(kind, EventKind::CookieAccepted(StoreResult::Stored | StoreResult::Replaced))
}

/// Cookies stored from, or sent to, a third party in an unverifiable
/// transaction, judged by the independent reach oracle.
pub fn third_party_leaks(events: &[TraceEvent]) -> Vec<&TraceEvent> {
    events
        .iter()
        .filter(|e| match &e.origin {
            Some(origin) => !within_reach(&e.host, origin),
            None => false,
        })
        .filter(|e| is_store(&e.kind) || e.kind == EventKind::CookieSent)
        .collect()
}

/// Cache hits that handed Set-Cookie headers stored for another client, or
/// that led to a cookie being stored from the cached copy.
pub fn shared_set_cookie_hits(events: &[TraceEvent]) -> Vec<&TraceEvent> {
    let mut bad = Vec::new();
    for (i, e) in events.iter().enumerate() {
        if e.kind != EventKind::CacheServed {
            continue;
        }
        let stored_by = e.detail_value("stored-by").unwrap_or_default();
        if stored_by == e.client {
            continue;
        }
        if e.detail_value("set-cookie") != Some("0") {
            bad.push(e);
        }
        let label = e.step_label();
        bad.extend(
            events[i + 1..]
                .iter()
                .take_while(|f| f.step_label() == label)
                .filter(|f| is_store(&f.kind)),
        );
    }
    bad
}

// ---------------------------------------------------------------------------
// select against the brute-force oracle

pub type Q = (usize, usize, usize, bool, i64);

pub fn check_select(ops: &[StoreOp], queries: &[Q]) -> Result<(), TestCaseError> {
    let clock = Arc::new(ManualClock::new(1000));
    let mut jar = Jar::new(clock.clone());
    let mut origin_paths: HashMap<(String, String, String), &str> = HashMap::new();
    for (spec, host, port, path, https, advance) in ops {
        clock.advance(*advance);
        let scheme = if *https { "https" } else { "http" };
        let ctx = RequestContext::from_url(&format!("{scheme}://{host}:{port}{path}")).unwrap();
        let result = jar.store(spec.clone(), &ctx);
        if matches!(result, StoreResult::Stored | StoreResult::Replaced) {
            origin_paths.insert(model_key(spec, host, path), path);
        }
    }
    for (host, port, path, https, offset) in queries {
        let q = Query {
            host: JAR_HOSTS[*host],
            port: JAR_PORTS[*port],
            path: JAR_PATHS[*path],
            https: *https,
            now: 1000 + offset,
        };
        let scheme = if q.https { "https" } else { "http" };
        let ctx = RequestContext::from_url(&format!("{scheme}://{}:{}{}", q.host, q.port, q.path)).unwrap();
        let got = jar.select(&ctx, q.now);

        let mut want: Vec<_> = jar
            .iter()
            .filter(|c| {
                let key = c.key();
                let origin_path = origin_paths
                    .get(&(key.name.clone(), key.domain.clone(), key.path.clone()))
                    .unwrap_or_else(|| panic!("jar holds {key} which the model never stored"));
                oracle_selects(c, origin_path, &q)
            })
            .cloned()
            .collect();
        want.sort_by(|a, b| {
            b.effective_path
                .len()
                .cmp(&a.effective_path.len())
                .then(a.created_at.cmp(&b.created_at))
        });
        prop_assert_eq!(got, want);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// exhaustive domain checks

/// All dotted names of 1..=max_labels labels over `alphabet`.
pub fn small_universe(alphabet: &[&str], max_labels: usize) -> Vec<String> {
    let mut all: Vec<String> = alphabet.iter().map(|s| s.to_string()).collect();
    let mut frontier = all.clone();
    for _ in 1..max_labels {
        frontier = frontier
            .iter()
            .flat_map(|tail| alphabet.iter().map(move |head| format!("{head}.{tail}")))
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

/// Compares validate_domain_v1 with the oracle for every host and domain of
/// up to four labels over {a, b, local}, with and without a leading dot.
/// Returns the number of pairs checked.
pub fn exhaustive_v1_check() -> Result<usize, String> {
    let universe = small_universe(&["a", "b", "local"], 4);
    let mut checked = 0;
    for host in &universe {
        let h = HostName::parse(host).unwrap();
        for d in &universe {
            for dotted in [false, true] {
                let text = if dotted { format!(".{d}") } else { d.clone() };
                let got = validate_domain_v1(&h, &DomainPattern::parse(&text).unwrap());
                let want = match v1_domain_oracle(host, &text) {
                    V1Verdict::Accept => DomainVerdict::Accept,
                    V1Verdict::TooBroad => DomainVerdict::Reject(DomainRejection::TooBroad),
                    V1Verdict::NotTailMatch => DomainVerdict::Reject(DomainRejection::NotTailMatch),
                    V1Verdict::TooManyLevels => DomainVerdict::Reject(DomainRejection::TooManyLevels),
                };
                if got != want {
                    return Err(format!("host {host} domain {text}: got {got}, oracle {want}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
