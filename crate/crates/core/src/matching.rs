//! Host, domain, path and port matching.
//!
//! Host names are compared label by label, so `notshop.com` never tail-matches
//! `shop.com`. A host name without any dots is treated as if it carried the
//! `.local` suffix (its *effective* host name), which lets intranet servers
//! share cookies through `Domain=.local`.

use std::fmt;
use std::net::IpAddr;

use thiserror::Error;

use crate::header::PortSpec;

/// Top-level domains for which the v0 rule only demands two periods.
const TWO_PERIOD_TLDS: [&str; 7] = ["com", "edu", "net", "org", "gov", "mil", "int"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HostError {
    #[error("empty host name")]
    Empty,
    #[error("empty label in host name {0:?}")]
    EmptyLabel(String),
    #[error("invalid character {1:?} in host name {0:?}")]
    InvalidChar(String, char),
}

/// A request host, lowercased and split into labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HostName {
    labels: Vec<String>,
    is_ip: bool,
}

impl HostName {
    pub fn parse(text: &str) -> Result<HostName, HostError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(HostError::Empty);
        }
        let bare = text.trim_start_matches('[').trim_end_matches(']');
        if let Ok(addr) = bare.parse::<IpAddr>() {
            let labels = match addr {
                IpAddr::V4(v4) => v4.octets().iter().map(|o| o.to_string()).collect(),
                IpAddr::V6(v6) => vec![v6.to_string()],
            };
            return Ok(HostName { labels, is_ip: true });
        }

        let lower = text.to_ascii_lowercase();
        let mut labels = Vec::new();
        for label in lower.split('.') {
            if label.is_empty() {
                return Err(HostError::EmptyLabel(text.to_string()));
            }
            if let Some(c) = label
                .chars()
                .find(|c| !(c.is_ascii_alphanumeric() || *c == '-' || *c == '_'))
            {
                return Err(HostError::InvalidChar(text.to_string(), c));
            }
            labels.push(label.to_string());
        }
        Ok(HostName { labels, is_ip: false })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_ip(&self) -> bool {
        self.is_ip
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }
}

impl fmt::Display for HostName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels.join("."))
    }
}

impl std::str::FromStr for HostName {
    type Err = HostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HostName::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("empty domain")]
    Empty,
    #[error("malformed domain {0:?}")]
    Malformed(String),
}

/// The value of a Domain attribute, or a host-derived domain.
///
/// `text` never carries the leading dot; `leading_dot` records whether the
/// source text had one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DomainPattern {
    text: String,
    leading_dot: bool,
}

impl DomainPattern {
    pub fn parse(text: &str) -> Result<DomainPattern, DomainError> {
        let text = text.trim();
        let (leading_dot, rest) = match text.strip_prefix('.') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        if rest.is_empty() {
            return Err(DomainError::Empty);
        }
        if rest.split('.').any(|l| l.is_empty())
            || rest
                .chars()
                .any(|c| !(c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | ':')))
        {
            return Err(DomainError::Malformed(text.to_string()));
        }
        Ok(DomainPattern {
            text: rest.to_ascii_lowercase(),
            leading_dot,
        })
    }

    /// The pattern that names exactly `host`.
    pub fn from_host(host: &HostName) -> DomainPattern {
        DomainPattern {
            text: host.to_string(),
            leading_dot: false,
        }
    }

    /// The dotless domain text.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn leading_dot(&self) -> bool {
        self.leading_dot
    }

    pub fn with_leading_dot(&self) -> DomainPattern {
        DomainPattern {
            text: self.text.clone(),
            leading_dot: true,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.text.split('.')
    }

    pub fn label_count(&self) -> usize {
        self.text.split('.').count()
    }
}

impl fmt::Display for DomainPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.leading_dot {
            f.write_str(".")?;
        }
        f.write_str(&self.text)
    }
}

/// Why a Domain attribute was refused for the host that sent it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainRejection {
    /// The request host does not lie within the domain.
    NotTailMatch,
    /// The domain has too few periods (v0) or no embedded dot (v1).
    TooBroad,
    /// The request host is more than one label below the domain (v1).
    TooManyLevels,
    /// The request host is an IP literal; Domain is never honored.
    IpHost,
}

impl fmt::Display for DomainRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainRejection::NotTailMatch => "NotTailMatch",
            DomainRejection::TooBroad => "TooBroad",
            DomainRejection::TooManyLevels => "TooManyLevels",
            DomainRejection::IpHost => "IpHost",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainVerdict {
    Accept,
    Reject(DomainRejection),
}

impl DomainVerdict {
    pub fn is_accept(self) -> bool {
        self == DomainVerdict::Accept
    }
}

impl fmt::Display for DomainVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainVerdict::Accept => f.write_str("Accept"),
            DomainVerdict::Reject(reason) => write!(f, "Reject({reason})"),
        }
    }
}

/// Appends the `local` label to single-label host names.
pub fn effective_host(host: &HostName) -> HostName {
    if host.is_ip || host.labels.len() > 1 {
        return host.clone();
    }
    let mut labels = host.labels.clone();
    labels.push("local".to_string());
    HostName { labels, is_ip: false }
}

/// Tail-matches the effective host against `pattern` at a label boundary.
///
/// The leading dot of the pattern is ignored, so `.shop.com` matches
/// `shop.com` itself. IP literals only match their own text exactly.
pub fn domain_match(host: &HostName, pattern: &DomainPattern) -> bool {
    if host.is_ip {
        return !pattern.leading_dot && host.to_string() == pattern.text;
    }
    let host = effective_host(host);
    let pattern_labels: Vec<&str> = pattern.labels().collect();
    if pattern_labels.len() > host.labels.len() {
        return false;
    }
    host.labels
        .iter()
        .rev()
        .zip(pattern_labels.iter().rev())
        .all(|(h, p)| h == p)
}

/// Whether the effective host names exactly the pattern's domain.
pub fn host_equals(host: &HostName, pattern: &DomainPattern) -> bool {
    effective_host(host).to_string() == pattern.text
}

/// Domain attribute acceptance for Set-Cookie.
pub fn validate_domain_v0(request_host: &HostName, attr: &DomainPattern) -> DomainVerdict {
    if request_host.is_ip {
        return DomainVerdict::Reject(DomainRejection::IpHost);
    }
    if !domain_match(request_host, attr) {
        return DomainVerdict::Reject(DomainRejection::NotTailMatch);
    }
    // Count periods as if the value were written with a leading dot.
    let periods = attr.label_count();
    let tld = attr.labels().last().unwrap_or_default();
    let required = if TWO_PERIOD_TLDS.contains(&tld) { 2 } else { 3 };
    if periods < required {
        return DomainVerdict::Reject(DomainRejection::TooBroad);
    }
    DomainVerdict::Accept
}

/// Domain attribute acceptance for Set-Cookie2: at most one extra label.
pub fn validate_domain_v1(request_host: &HostName, attr: &DomainPattern) -> DomainVerdict {
    if request_host.is_ip {
        return DomainVerdict::Reject(DomainRejection::IpHost);
    }
    let attr = attr.with_leading_dot();
    if attr.label_count() < 2 && attr.text != "local" {
        return DomainVerdict::Reject(DomainRejection::TooBroad);
    }
    if !domain_match(request_host, &attr) {
        return DomainVerdict::Reject(DomainRejection::NotTailMatch);
    }
    if effective_host(request_host).label_count() > attr.label_count() + 1 {
        return DomainVerdict::Reject(DomainRejection::TooManyLevels);
    }
    DomainVerdict::Accept
}

/// Literal string-prefix path matching, so `/bar` also matches `/barn`.
pub fn path_match(request_path: &str, cookie_path: &str) -> bool {
    request_path.starts_with(cookie_path)
}

pub fn port_match(request_port: u16, origin_port: u16, spec: &PortSpec) -> bool {
    match spec {
        PortSpec::AnyPort => true,
        PortSpec::SamePortOnly => request_port == origin_port,
        PortSpec::PortList { ports, .. } => ports.contains(&request_port),
    }
}

/// The domain neighborhood of a host: `.B` for a host `A.B` when `B` has an
/// embedded dot or is `local`, otherwise the effective host itself.
pub fn reach(host: &HostName) -> DomainPattern {
    let host = effective_host(host);
    if !host.is_ip && host.labels.len() >= 2 {
        let rest = &host.labels[1..];
        if rest.len() >= 2 || rest[0] == "local" {
            return DomainPattern {
                text: rest.join("."),
                leading_dot: true,
            };
        }
    }
    DomainPattern::from_host(&host)
}
