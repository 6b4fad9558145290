//! Runs an [`ExchangeScript`] against per-client jars and policies.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::date::UnixTime;
use crate::header::{parse_set_cookie, serialize_cookie_header, CookieSpec, Mode};
use crate::jar::{Clock, Jar, ManualClock, StoreRejection, StoreResult, StoredCookie};
use crate::matching::DomainPattern;
use crate::policy::{
    evaluate_accept, evaluate_send, AcceptDecision, OriginTransaction, PolicyConfig, PrivacyMode, RejectReason,
    RequestContext, SendDecision,
};

use super::cache::{cache_decision, ProxyCache};
use super::emulate::{emulate_client, ClientFlavor, Emulated, SetCookieKind};
use super::negotiate::negotiate_with_rule;
use super::script::{ClientDecl, ExchangeScript, Link, ResponseStep, Step};
use super::trace::{EventKind, Rejection, TraceEvent};
use super::Header;

/// 1997-01-01T00:00:00Z, the default start of simulated time.
pub const SIM_EPOCH: UnixTime = 852_076_800;

/// How many levels of page links are followed from one request.
pub const MAX_LINK_DEPTH: usize = 8;

/// Jars, policies and the clock a script runs against. Jars that are put
/// into `jars` by hand should be built on `clock`.
pub struct SimEnv {
    pub clock: Arc<ManualClock>,
    pub jars: BTreeMap<String, Jar>,
    pub policies: BTreeMap<String, PolicyConfig>,
    pub default_policy: PolicyConfig,
}

impl SimEnv {
    pub fn new(start: UnixTime) -> SimEnv {
        SimEnv {
            clock: Arc::new(ManualClock::new(start)),
            jars: BTreeMap::new(),
            policies: BTreeMap::new(),
            default_policy: PolicyConfig::default(),
        }
    }

    pub fn jar(&self, client: &str) -> Option<&Jar> {
        self.jars.get(client)
    }

    fn jar_mut(&mut self, client: &str) -> &mut Jar {
        let clock = self.clock.clone();
        self.jars
            .entry(client.to_string())
            .or_insert_with(|| Jar::new(clock))
    }

    fn policy(&self, client: &str) -> PolicyConfig {
        self.policies.get(client).copied().unwrap_or(self.default_policy)
    }
}

impl Default for SimEnv {
    fn default() -> Self {
        SimEnv::new(SIM_EPOCH)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {message}")]
pub struct ExchangeError {
    pub step: usize,
    pub message: String,
}

struct Served {
    headers: Vec<Header>,
    links: Vec<Link>,
    cacheable: bool,
}

impl From<&ResponseStep> for Served {
    fn from(r: &ResponseStep) -> Served {
        Served {
            headers: r.headers.clone(),
            links: r.links.clone(),
            cacheable: r.cacheable,
        }
    }
}

/// Where an event came from, shared by every event of one transaction.
#[derive(Clone)]
struct Site<'a> {
    step: usize,
    link_path: Vec<usize>,
    client: &'a ClientDecl,
    host: String,
    origin: Option<String>,
}

struct Run<'a> {
    script: &'a ExchangeScript,
    env: &'a mut SimEnv,
    caches: BTreeMap<String, ProxyCache>,
    contacted: BTreeSet<(String, String)>,
    /// For each request step, the origin transaction its derived requests use.
    origins: Vec<Option<OriginTransaction>>,
    events: Vec<TraceEvent>,
}

/// Executes `script` step by step and returns the trace. The same script
/// and starting clock always give the same trace.
pub fn run_exchange(script: &ExchangeScript, env: &mut SimEnv) -> Result<Vec<TraceEvent>, ExchangeError> {
    script.validate().map_err(|e| ExchangeError {
        step: e.step.unwrap_or(0),
        message: e.message,
    })?;
    let mut run = Run {
        script,
        env,
        caches: BTreeMap::new(),
        contacted: BTreeSet::new(),
        origins: vec![None; script.steps.len()],
        events: Vec::new(),
    };

    let mut i = 0;
    while i < script.steps.len() {
        match &script.steps[i] {
            Step::Request(req) => {
                let fail = |message: String| ExchangeError { step: i, message };
                let client = run.client(&req.client).ok_or_else(|| fail("unknown client".into()))?;
                let mut ctx = RequestContext::from_url(&req.url).map_err(|e| fail(e.to_string()))?;
                if let Some((from, trigger)) = req.derived {
                    let origin = run.origins[from]
                        .clone()
                        .ok_or_else(|| fail(format!("step {from} has no transaction")))?;
                    ctx = ctx.derived_from(origin, trigger);
                }
                let explicit = match script.steps.get(i + 1) {
                    Some(Step::Response(r)) => Some(Served::from(r)),
                    _ => None,
                };
                let consumed = if explicit.is_some() { 2 } else { 1 };
                let origin = run
                    .transaction(i, Vec::new(), client, ctx, req.proxy.as_deref(), &req.headers, explicit, 0)
                    .map_err(fail)?;
                run.origins[i] = Some(origin);
                i += consumed;
                continue;
            }
            Step::Response(_) => {
                return Err(ExchangeError {
                    step: i,
                    message: "response without a preceding request".into(),
                })
            }
            Step::Advance(secs) => run.env.clock.advance(*secs),
            Step::EndSession(id) => {
                let client = run.client(id).ok_or_else(|| ExchangeError {
                    step: i,
                    message: "unknown client".into(),
                })?;
                let removed = run.env.jar_mut(id).end_session();
                let site = Site {
                    step: i,
                    link_path: Vec::new(),
                    client,
                    host: "-".into(),
                    origin: None,
                };
                run.emit(&site, EventKind::SessionEnded, None, "jar.end-session", format!("removed={removed}"));
            }
        }
        i += 1;
    }
    Ok(run.events)
}

fn rule_for(reason: RejectReason) -> &'static str {
    match reason {
        RejectReason::ThirdParty => "policy.reach",
        RejectReason::NoOriginCookie => "policy.strict-origin-cookie",
        RejectReason::CommentUrlContext => "policy.comment-url",
    }
}

fn suppress_rule(policy: &PolicyConfig) -> &'static str {
    if policy.comment_url_context {
        return rule_for(RejectReason::CommentUrlContext);
    }
    match policy.mode {
        PrivacyMode::ReachBased => rule_for(RejectReason::ThirdParty),
        PrivacyMode::Rfc2109Strict => rule_for(RejectReason::NoOriginCookie),
    }
}

fn store_rule(result: &StoreResult, version: u8) -> &'static str {
    match result {
        StoreResult::Stored => "store.new",
        StoreResult::Replaced => "store.replace",
        StoreResult::Deleted => "store.delete",
        StoreResult::ExpiredOnArrival => "store.expired",
        StoreResult::Rejected(StoreRejection::InvalidDomain(_)) if version == 0 => "domain.v0",
        StoreResult::Rejected(StoreRejection::InvalidDomain(_)) => "domain.v1",
        StoreResult::Rejected(StoreRejection::PortNotListed) => "port.list",
    }
}

impl<'a> Run<'a> {
    fn client(&self, id: &str) -> Option<&'a ClientDecl> {
        self.script.clients.iter().find(|c| c.id == id)
    }

    fn emit(&mut self, site: &Site<'_>, kind: EventKind, key: Option<crate::jar::CookieKey>, rule: &'static str, detail: String) {
        self.events.push(TraceEvent {
            step: site.step,
            link_path: site.link_path.clone(),
            client: site.client.id.clone(),
            host: site.host.clone(),
            origin: site.origin.clone(),
            kind,
            key,
            rule,
            detail,
        });
    }

    fn routed(&self, ctx: &RequestContext) -> Served {
        match self.script.route(&ctx.host.to_string(), &ctx.path) {
            Some(route) => Served {
                headers: route.headers.clone(),
                links: route.links.clone(),
                cacheable: true,
            },
            None => Served {
                headers: Vec::new(),
                links: Vec::new(),
                cacheable: true,
            },
        }
    }

    /// One request/response pair plus the requests its links spawn.
    /// Returns the origin transaction that requests derived from it use.
    #[allow(clippy::too_many_arguments)]
    fn transaction(
        &mut self,
        step: usize,
        link_path: Vec<usize>,
        client: &'a ClientDecl,
        ctx: RequestContext,
        proxy: Option<&str>,
        extra_headers: &[Header],
        explicit: Option<Served>,
        depth: usize,
    ) -> Result<OriginTransaction, String> {
        let host = ctx.host.to_string();
        let site = Site {
            step,
            link_path: link_path.clone(),
            client,
            host: host.clone(),
            origin: ctx.origin_transaction().map(|o| o.host.to_string()),
        };
        let policy = self.env.policy(&client.id);
        let now = self.env.clock.now();
        let mut cookie_domains: Vec<DomainPattern> = Vec::new();

        // Request side.
        let selected = self.env.jar_mut(&client.id).select(&ctx, now);
        let sent: Vec<StoredCookie> = match evaluate_send(&policy, &ctx) {
            SendDecision::Allow => selected,
            SendDecision::Suppress => {
                for c in &selected {
                    self.emit(&site, EventKind::CookieSuppressed, Some(c.key()), suppress_rule(&policy), format!("value={}", c.spec.value));
                }
                Vec::new()
            }
        };
        for c in &sent {
            self.emit(&site, EventKind::CookieSent, Some(c.key()), "send.match", format!("value={}", c.spec.value));
            cookie_domains.extend(c.spec.domain.clone());
        }

        let mut request_headers = Vec::new();
        let mut header_version = 0;
        if !sent.is_empty() {
            if client.flavor.understands_v1() && sent.iter().any(|c| c.spec.version >= 1) {
                header_version = 1;
            }
            request_headers.push(Header::new("Cookie", serialize_cookie_header(&sent, header_version)));
        }
        let seen_before = !self.contacted.insert((client.id.clone(), host.clone()));
        if client.flavor == ClientFlavor::Rfc2965 && header_version == 0 && (!sent.is_empty() || seen_before) {
            request_headers.push(Header::new("Cookie2", "$Version=1"));
        }
        request_headers.extend(extra_headers.iter().cloned());

        // Response side: proxy cache, then origin server.
        let cache_key = (host.clone(), ctx.port, ctx.path.clone());
        let hit = proxy.and_then(|p| self.caches.get(p)).and_then(|c| c.lookup(&cache_key.0, cache_key.1, &cache_key.2)).cloned();
        let served = match hit {
            Some(cached) => {
                self.emit(
                    &site,
                    EventKind::CacheServed,
                    None,
                    "cache.hit",
                    format!("set-cookie={} stored-by={}", cached.set_cookie_count(), cached.stored_by),
                );
                Served {
                    headers: cached.headers,
                    links: cached.links,
                    cacheable: true,
                }
            }
            None => {
                let mut served = explicit.unwrap_or_else(|| self.routed(&ctx));
                if let Some(capability) = self.script.server_capability(&host) {
                    let (plan, rule) = negotiate_with_rule(capability, &request_headers);
                    self.emit(&site, EventKind::Negotiated(plan), None, rule, String::new());
                    served.headers.retain(|h| {
                        (!h.is("Set-Cookie") || plan.allows_v0()) && (!h.is("Set-Cookie2") || plan.allows_v1())
                    });
                }
                if let Some(p) = proxy {
                    let decision = cache_decision(&served.headers, served.cacheable);
                    if decision.store_body {
                        let cache = self.caches.entry(p.to_string()).or_default();
                        let stripped = cache.store(cache_key, &served.headers, &served.links, decision, &client.id);
                        let kept = served.headers.len() - stripped.len();
                        let kept_cookies = served
                            .headers
                            .iter()
                            .filter(|h| h.is("Set-Cookie") || h.is("Set-Cookie2"))
                            .count()
                            - stripped.len();
                        self.emit(
                            &site,
                            EventKind::CacheStored,
                            None,
                            "cache.store",
                            format!("proxy={p} headers={kept} set-cookie={kept_cookies}"),
                        );
                        for h in stripped {
                            self.emit(&site, EventKind::SetCookieStripped, None, "cache.strip-set-cookie", h.to_string());
                        }
                    }
                }
                served
            }
        };

        self.receive(&site, &ctx, &policy, &served.headers, &mut cookie_domains);

        let origin = match ctx.origin_transaction() {
            Some(o) => o.clone(),
            None => OriginTransaction {
                host: ctx.host.clone(),
                cookie_domains,
            },
        };

        if depth < MAX_LINK_DEPTH {
            for (n, link) in served.links.iter().enumerate() {
                let child = RequestContext::from_url(&link.url)
                    .map_err(|e| e.to_string())?
                    .derived_from(origin.clone(), link.trigger);
                let mut path = link_path.clone();
                path.push(n + 1);
                self.transaction(step, path, client, child, proxy, &[], None, depth + 1)?;
            }
        }
        Ok(origin)
    }

    /// Handles the Set-Cookie and Set-Cookie2 headers of one response.
    fn receive(
        &mut self,
        site: &Site<'_>,
        ctx: &RequestContext,
        policy: &PolicyConfig,
        headers: &[Header],
        cookie_domains: &mut Vec<DomainPattern>,
    ) {
        let flavor = site.client.flavor;
        let now = self.env.clock.now();
        let key_of = |spec: &CookieSpec| StoredCookie::from_spec(spec.clone(), ctx, now).key();
        let mut candidates: Vec<CookieSpec> = Vec::new();
        let mut v1_names = BTreeSet::new();

        for h in headers.iter().filter(|h| h.is("Set-Cookie2")) {
            if !flavor.understands_v1() {
                self.emit(site, EventKind::CookieRejected(Rejection::NotUnderstood), None, "emulate.legacy-client", h.value.clone());
                continue;
            }
            match parse_set_cookie(&h.value, Mode::V1) {
                Ok(specs) => {
                    for spec in specs {
                        v1_names.insert(spec.name.clone());
                        candidates.push(spec);
                    }
                }
                Err(e) => self.emit(site, EventKind::CookieRejected(Rejection::Parse(e.class())), None, "parse.set-cookie2", h.value.clone()),
            }
        }

        for h in headers.iter().filter(|h| h.is("Set-Cookie")) {
            if flavor == ClientFlavor::Rfc2965 {
                match parse_set_cookie(&h.value, Mode::V0) {
                    Ok(specs) => {
                        for spec in specs {
                            if v1_names.contains(&spec.name) {
                                self.emit(
                                    site,
                                    EventKind::CookieRejected(Rejection::Superseded),
                                    Some(key_of(&spec)),
                                    "negotiate.superseded",
                                    format!("value={}", spec.value),
                                );
                            } else {
                                candidates.push(spec);
                            }
                        }
                    }
                    Err(e) => self.emit(site, EventKind::CookieRejected(Rejection::Parse(e.class())), None, "parse.set-cookie", h.value.clone()),
                }
                continue;
            }
            match emulate_client(flavor, SetCookieKind::SetCookie, &h.value) {
                Emulated::Stored { name, value } => {
                    // Attributes the way a v0 parser sees them; name and
                    // value the way this client picked them.
                    let mut spec = parse_set_cookie(&h.value, Mode::V0)
                        .ok()
                        .and_then(|specs| specs.into_iter().next())
                        .unwrap_or_else(|| CookieSpec::new(name.clone(), value.clone(), 0));
                    spec.name = name;
                    spec.value = value;
                    candidates.push(spec);
                }
                Emulated::Ignored { diagnostic } => self.emit(
                    site,
                    EventKind::CookieRejected(Rejection::Parse("MissingNameValue")),
                    None,
                    "emulate.legacy-client",
                    diagnostic,
                ),
            }
        }

        for spec in candidates {
            let key = key_of(&spec);
            let value = format!("value={}", spec.value);
            match evaluate_accept(policy, ctx, &spec) {
                AcceptDecision::Reject(reason) => {
                    self.emit(site, EventKind::CookieRejected(Rejection::Policy(reason)), Some(key), rule_for(reason), value)
                }
                AcceptDecision::Prompt => {
                    self.emit(site, EventKind::CookieRejected(Rejection::Prompt), Some(key), "policy.prompt", value)
                }
                AcceptDecision::Accept => {
                    let version = spec.version;
                    let domain = spec.domain.clone();
                    let jar = self.env.jar_mut(&site.client.id);
                    let previous = jar.get(&key).map(|c| c.spec.value.clone());
                    let result = jar.store(spec, ctx);
                    let rule = store_rule(&result, version);
                    match result {
                        StoreResult::Rejected(r) => {
                            self.emit(site, EventKind::CookieRejected(Rejection::Store(r)), Some(key), rule, value)
                        }
                        outcome => {
                            if matches!(outcome, StoreResult::Stored | StoreResult::Replaced) {
                                cookie_domains.extend(domain);
                            }
                            let detail = match previous {
                                Some(p) => format!("{value} previous={p}"),
                                None => value,
                            };
                            self.emit(site, EventKind::CookieAccepted(outcome), Some(key), rule, detail);
                        }
                    }
                }
            }
        }
    }
}
