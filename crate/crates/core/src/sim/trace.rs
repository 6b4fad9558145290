//! Trace events emitted by [`run_exchange`](super::run_exchange) and their
//! line format.
//!
//! One event per line, tab-separated:
//!
//! ```text
//! step  client  host  origin  event  key  rule  detail
//! ```
//!
//! `step` is the script step index, with `.n` suffixes for requests spawned
//! from page links. `origin` is `-` for origin transactions. `key` is
//! `name;domain;path` or `-`. `detail` is free text or `-`.

use std::fmt;

use crate::jar::{CookieKey, StoreRejection, StoreResult};
use crate::policy::RejectReason;

use super::negotiate::HeaderPlan;

/// Why a received cookie was not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    Policy(RejectReason),
    /// The policy wanted to ask the user; the simulator has no user.
    Prompt,
    Store(StoreRejection),
    /// The header did not parse; carries the error class.
    Parse(&'static str),
    /// A Set-Cookie2 header reaching a client that predates it.
    NotUnderstood,
    /// A Set-Cookie whose name already arrived in a Set-Cookie2 header of the
    /// same response.
    Superseded,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Policy(r) => write!(f, "{r}"),
            Rejection::Prompt => f.write_str("Prompt"),
            Rejection::Store(r) => write!(f, "{r}"),
            Rejection::Parse(class) => write!(f, "Parse({class})"),
            Rejection::NotUnderstood => f.write_str("NotUnderstood"),
            Rejection::Superseded => f.write_str("Superseded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Carries the jar outcome: Stored, Replaced, Deleted or ExpiredOnArrival.
    CookieAccepted(StoreResult),
    CookieRejected(Rejection),
    CookieSent,
    CookieSuppressed,
    CacheStored,
    CacheServed,
    SetCookieStripped,
    Negotiated(HeaderPlan),
    SessionEnded,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::CookieAccepted(r) => write!(f, "CookieAccepted({r})"),
            EventKind::CookieRejected(r) => write!(f, "CookieRejected({r})"),
            EventKind::CookieSent => f.write_str("CookieSent"),
            EventKind::CookieSuppressed => f.write_str("CookieSuppressed"),
            EventKind::CacheStored => f.write_str("CacheStored"),
            EventKind::CacheServed => f.write_str("CacheServed"),
            EventKind::SetCookieStripped => f.write_str("SetCookieStripped"),
            EventKind::Negotiated(plan) => write!(f, "Negotiated({plan})"),
            EventKind::SessionEnded => f.write_str("SessionEnded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: usize,
    /// Link positions (1-based) leading from the step's request to the
    /// derived request that produced this event; empty for the step itself.
    pub link_path: Vec<usize>,
    pub client: String,
    pub host: String,
    /// Host of the origin transaction for derived requests.
    pub origin: Option<String>,
    pub kind: EventKind,
    pub key: Option<CookieKey>,
    pub rule: &'static str,
    pub detail: String,
}

impl TraceEvent {
    pub fn step_label(&self) -> String {
        let mut label = self.step.to_string();
        for n in &self.link_path {
            label.push('.');
            label.push_str(&n.to_string());
        }
        label
    }

    /// `key=value` pairs in the detail column.
    pub fn detail_value(&self, name: &str) -> Option<&str> {
        self.detail
            .split(' ')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v)
    }
}

fn clean(text: &str) -> String {
    if text.is_empty() {
        return "-".to_string();
    }
    text.replace(['\t', '\n', '\r'], " ")
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.step_label(),
            self.client,
            self.host,
            self.origin.as_deref().unwrap_or("-"),
            self.kind,
            self.key.as_ref().map_or_else(|| "-".to_string(), |k| clean(&k.to_string())),
            self.rule,
            clean(&self.detail),
        )
    }
}

/// The whole trace, one line per event, each line newline-terminated.
pub fn format_trace(events: &[TraceEvent]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_layout() {
        let event = TraceEvent {
            step: 3,
            link_path: vec![1, 2],
            client: "alice".into(),
            host: "www.ads.com".into(),
            origin: Some("www.news.com".into()),
            kind: EventKind::CookieRejected(Rejection::Policy(RejectReason::ThirdParty)),
            key: Some(CookieKey {
                name: "ad".into(),
                domain: "www.ads.com".into(),
                path: "/".into(),
            }),
            rule: "policy.reach",
            detail: "value=1".into(),
        };
        assert_eq!(
            event.to_string(),
            "3.1.2\talice\twww.ads.com\twww.news.com\tCookieRejected(ThirdParty)\tad;www.ads.com;/\tpolicy.reach\tvalue=1"
        );
        assert_eq!(event.detail_value("value"), Some("1"));
        assert_eq!(format_trace(&[]), "");
    }

    #[test]
    fn accepted_shows_jar_outcome() {
        assert_eq!(
            EventKind::CookieAccepted(StoreResult::Replaced).to_string(),
            "CookieAccepted(Replaced)"
        );
        assert_eq!(
            EventKind::Negotiated(HeaderPlan::SendBoth).to_string(),
            "Negotiated(SendBoth)"
        );
    }
}
