//! Transaction classification and the privacy rules for accepting and
//! sending cookies.
//!
//! A transaction the user initiated is *verifiable*; requests a user agent
//! makes on its own (inline images, followed redirects, auto-submitted
//! forms) are *unverifiable*. Cookie traffic in unverifiable transactions is
//! gated by one of two rules:
//!
//! * [`PrivacyMode::ReachBased`] refuses hosts outside the reach of the
//!   origin transaction's host (third-party hosts).
//! * [`PrivacyMode::Rfc2109Strict`] only allows hosts that domain-match a
//!   Domain attribute sent or received in the origin transaction. This is
//!   much harsher: an origin page that carried no cookies blocks cookies on
//!   all of its embedded images, even same-site ones.
//!
//! Overrides exist for both rules but are off by default.

use std::fmt;

use thiserror::Error;
use url::Url;

use crate::header::CookieSpec;
use crate::matching::{domain_match, reach, DomainPattern, HostError, HostName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trigger {
    InlineEntity,
    Redirect3xx,
    FormAutoSubmit,
}

impl Trigger {
    pub fn as_str(self) -> &'static str {
        match self {
            Trigger::InlineEntity => "inline",
            Trigger::Redirect3xx => "redirect",
            Trigger::FormAutoSubmit => "form",
        }
    }

    pub fn parse(text: &str) -> Option<Trigger> {
        match text {
            "inline" => Some(Trigger::InlineEntity),
            "redirect" => Some(Trigger::Redirect3xx),
            "form" => Some(Trigger::FormAutoSubmit),
            _ => None,
        }
    }
}

/// What a derived transaction remembers about the transaction it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginTransaction {
    pub host: HostName,
    /// Domain attributes of cookies sent or received in the origin transaction.
    pub cookie_domains: Vec<DomainPattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransactionKind {
    Origin,
    Derived {
        origin: OriginTransaction,
        trigger: Trigger,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("invalid URL {0:?}")]
    Invalid(String),
    #[error("URL {0:?} is not http or https")]
    Scheme(String),
    #[error(transparent)]
    Host(#[from] HostError),
}

/// One HTTP transaction as seen by the cookie engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestContext {
    pub host: HostName,
    pub port: u16,
    pub path: String,
    pub secure_channel: bool,
    pub kind: TransactionKind,
}

impl RequestContext {
    pub fn origin(host: HostName, port: u16, path: impl Into<String>, secure_channel: bool) -> Self {
        RequestContext {
            host,
            port,
            path: path.into(),
            secure_channel,
            kind: TransactionKind::Origin,
        }
    }

    /// An origin context for an `http` or `https` URL.
    pub fn from_url(text: &str) -> Result<RequestContext, UrlError> {
        let url = Url::parse(text).map_err(|_| UrlError::Invalid(text.to_string()))?;
        let secure = match url.scheme() {
            "http" => false,
            "https" => true,
            _ => return Err(UrlError::Scheme(text.to_string())),
        };
        let host = url.host_str().ok_or_else(|| UrlError::Invalid(text.to_string()))?;
        let host = HostName::parse(host)?;
        let port = url.port_or_known_default().unwrap_or(if secure { 443 } else { 80 });
        Ok(RequestContext::origin(host, port, url.path(), secure))
    }

    /// Turns this context into an unverifiable one spawned by `origin`.
    pub fn derived_from(mut self, origin: OriginTransaction, trigger: Trigger) -> Self {
        self.kind = TransactionKind::Derived { origin, trigger };
        self
    }

    pub fn origin_transaction(&self) -> Option<&OriginTransaction> {
        match &self.kind {
            TransactionKind::Origin => None,
            TransactionKind::Derived { origin, .. } => Some(origin),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PrivacyMode {
    Rfc2109Strict,
    #[default]
    ReachBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolicyConfig {
    pub mode: PrivacyMode,
    pub third_party_override: bool,
    pub prompt_enabled: bool,
    /// The request is the user inspecting a CommentURL; no cookies flow.
    pub comment_url_context: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verifiability {
    Verifiable,
    Unverifiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    ThirdParty,
    NoOriginCookie,
    CommentUrlContext,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::ThirdParty => "ThirdParty",
            RejectReason::NoOriginCookie => "NoOriginCookie",
            RejectReason::CommentUrlContext => "CommentUrlContext",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptDecision {
    Accept,
    Reject(RejectReason),
    Prompt,
}

impl fmt::Display for AcceptDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcceptDecision::Accept => f.write_str("Accept"),
            AcceptDecision::Reject(r) => write!(f, "Reject({r})"),
            AcceptDecision::Prompt => f.write_str("Prompt"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendDecision {
    Allow,
    Suppress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("third-party status is only defined for derived transactions")]
pub struct NotDerived;

pub fn classify_transaction(ctx: &RequestContext) -> Verifiability {
    match ctx.kind {
        TransactionKind::Origin => Verifiability::Verifiable,
        TransactionKind::Derived { .. } => Verifiability::Unverifiable,
    }
}

/// Whether a derived transaction's host lies outside the reach of its
/// origin transaction's host.
pub fn is_third_party(ctx: &RequestContext) -> Result<bool, NotDerived> {
    let origin = ctx.origin_transaction().ok_or(NotDerived)?;
    Ok(!domain_match(&ctx.host, &reach(&origin.host)))
}

/// The unverifiable-transaction rule for the configured mode, before any
/// override is applied.
fn unverifiable_rule(policy: &PolicyConfig, ctx: &RequestContext) -> Option<RejectReason> {
    let origin = ctx.origin_transaction()?;
    match policy.mode {
        PrivacyMode::ReachBased => {
            if !domain_match(&ctx.host, &reach(&origin.host)) {
                return Some(RejectReason::ThirdParty);
            }
        }
        PrivacyMode::Rfc2109Strict => {
            if !origin.cookie_domains.iter().any(|d| domain_match(&ctx.host, d)) {
                return Some(RejectReason::NoOriginCookie);
            }
        }
    }
    None
}

/// Decides whether a cookie received in `ctx` may be stored. Domain
/// attribute validation is a separate step.
pub fn evaluate_accept(policy: &PolicyConfig, ctx: &RequestContext, _spec: &CookieSpec) -> AcceptDecision {
    if policy.comment_url_context {
        return AcceptDecision::Reject(RejectReason::CommentUrlContext);
    }
    if classify_transaction(ctx) == Verifiability::Verifiable {
        return AcceptDecision::Accept;
    }
    match unverifiable_rule(policy, ctx) {
        None => AcceptDecision::Accept,
        Some(_) if policy.third_party_override => AcceptDecision::Accept,
        Some(_) if policy.prompt_enabled => AcceptDecision::Prompt,
        Some(reason) => AcceptDecision::Reject(reason),
    }
}

/// Decides whether a Cookie header may be sent in `ctx`.
pub fn evaluate_send(policy: &PolicyConfig, ctx: &RequestContext) -> SendDecision {
    if policy.comment_url_context {
        return SendDecision::Suppress;
    }
    if classify_transaction(ctx) == Verifiability::Verifiable {
        return SendDecision::Allow;
    }
    match unverifiable_rule(policy, ctx) {
        Some(_) if !policy.third_party_override => SendDecision::Suppress,
        _ => SendDecision::Allow,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host(s: &str) -> HostName {
        HostName::parse(s).unwrap()
    }

    fn derived(origin: &str, target: &str, domains: &[&str], trigger: Trigger) -> RequestContext {
        let origin = OriginTransaction {
            host: host(origin),
            cookie_domains: domains.iter().map(|d| DomainPattern::parse(d).unwrap()).collect(),
        };
        RequestContext::origin(host(target), 80, "/", false).derived_from(origin, trigger)
    }

    fn spec() -> CookieSpec {
        CookieSpec::new("ad", "1", 0)
    }

    #[test]
    fn classification() {
        let page = RequestContext::from_url("http://www.news.com/").unwrap();
        assert_eq!(classify_transaction(&page), Verifiability::Verifiable);
        for trigger in [Trigger::InlineEntity, Trigger::Redirect3xx, Trigger::FormAutoSubmit] {
            let ctx = derived("www.news.com", "www.ads.com", &[], trigger);
            assert_eq!(classify_transaction(&ctx), Verifiability::Unverifiable);
        }
    }

    #[test]
    fn third_party_hosts() {
        let t = Trigger::InlineEntity;
        assert_eq!(is_third_party(&derived("www.news.com", "www.ads.com", &[], t)), Ok(true));
        assert_eq!(is_third_party(&derived("www.news.com", "images.news.com", &[], t)), Ok(false));
        assert_eq!(is_third_party(&derived("www.news.com", "www.news.com", &[], t)), Ok(false));
        let page = RequestContext::from_url("http://www.news.com/").unwrap();
        assert_eq!(is_third_party(&page), Err(NotDerived));
    }

    #[test]
    fn accept_decisions() {
        let ads = derived("www.news.com", "www.ads.com", &[], Trigger::InlineEntity);
        let mut policy = PolicyConfig::default();
        assert!(!policy.third_party_override);
        assert_eq!(evaluate_accept(&policy, &ads, &spec()), AcceptDecision::Reject(RejectReason::ThirdParty));

        policy.third_party_override = true;
        assert_eq!(evaluate_accept(&policy, &ads, &spec()), AcceptDecision::Accept);

        let policy = PolicyConfig { prompt_enabled: true, ..PolicyConfig::default() };
        assert_eq!(evaluate_accept(&policy, &ads, &spec()), AcceptDecision::Prompt);

        let strict = PolicyConfig { mode: PrivacyMode::Rfc2109Strict, ..PolicyConfig::default() };
        let images = derived("www.news.com", "images.news.com", &[], Trigger::InlineEntity);
        assert_eq!(
            evaluate_accept(&strict, &images, &spec()),
            AcceptDecision::Reject(RejectReason::NoOriginCookie)
        );
        let images = derived("www.news.com", "images.news.com", &[".news.com"], Trigger::InlineEntity);
        assert_eq!(evaluate_accept(&strict, &images, &spec()), AcceptDecision::Accept);

        let comment = PolicyConfig { comment_url_context: true, ..PolicyConfig::default() };
        let page = RequestContext::from_url("http://www.news.com/").unwrap();
        assert_eq!(
            evaluate_accept(&comment, &page, &spec()),
            AcceptDecision::Reject(RejectReason::CommentUrlContext)
        );
    }

    #[test]
    fn send_decisions() {
        let policy = PolicyConfig::default();
        let page = RequestContext::from_url("http://www.news.com/").unwrap();
        assert_eq!(evaluate_send(&policy, &page), SendDecision::Allow);
        let ads = derived("www.news.com", "www.ads.com", &[], Trigger::InlineEntity);
        assert_eq!(evaluate_send(&policy, &ads), SendDecision::Suppress);
        let comment = PolicyConfig { comment_url_context: true, ..PolicyConfig::default() };
        assert_eq!(evaluate_send(&comment, &page), SendDecision::Suppress);
        let lenient = PolicyConfig { third_party_override: true, ..PolicyConfig::default() };
        assert_eq!(evaluate_send(&lenient, &ads), SendDecision::Allow);
    }

    #[test]
    fn override_is_irrelevant_for_verifiable() {
        let page = RequestContext::from_url("https://www.shop.com/cart").unwrap();
        for mode in [PrivacyMode::ReachBased, PrivacyMode::Rfc2109Strict] {
            let off = PolicyConfig { mode, ..PolicyConfig::default() };
            let on = PolicyConfig { mode, third_party_override: true, ..PolicyConfig::default() };
            assert_eq!(evaluate_accept(&off, &page, &spec()), evaluate_accept(&on, &page, &spec()));
            assert_eq!(evaluate_send(&off, &page), evaluate_send(&on, &page));
        }
    }

    #[test]
    fn url_contexts() {
        let ctx = RequestContext::from_url("https://Shop.COM:8443/a/b").unwrap();
        assert_eq!(ctx.host.to_string(), "shop.com");
        assert_eq!(ctx.port, 8443);
        assert_eq!(ctx.path, "/a/b");
        assert!(ctx.secure_channel);
        assert_eq!(RequestContext::from_url("http://x.com").unwrap().path, "/");
        assert!(matches!(RequestContext::from_url("ftp://x.com/"), Err(UrlError::Scheme(_))));
    }
}
