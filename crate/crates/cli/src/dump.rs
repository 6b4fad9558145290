//! Structured `key=value` output shared by `parse`, `match` and the corpus
//! runner. Keys are stable; the corpus compares against them.

use std::fmt;

use statejar::header::{parse_cookie2, parse_cookie_request, parse_set_cookie, CookieSpec, Mode, ParseError, PortSpec};
use statejar::matching::{validate_domain_v0, validate_domain_v1, DomainVerdict};
use statejar::sim::{emulate_client, ClientFlavor, Emulated, SetCookieKind};
use statejar::{DomainPattern, HostName};

/// An ordered list of `key=value` records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dump(pub Vec<(String, String)>);

impl Dump {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Dump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k}={}", escape(v))?;
        }
        Ok(())
    }
}

/// Keeps every record on one line.
pub fn escape(value: &str) -> String {
    value.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

/// What `parse` and the corpus can be asked to interpret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ParseMode {
    /// Set-Cookie
    V0,
    /// Set-Cookie2
    V1,
    /// Cookie request header
    Cookie,
    /// Cookie2 request header
    Cookie2,
}

impl ParseMode {
    pub fn from_name(name: &str) -> Option<ParseMode> {
        match name {
            "v0" => Some(ParseMode::V0),
            "v1" => Some(ParseMode::V1),
            "cookie" => Some(ParseMode::Cookie),
            "cookie2" => Some(ParseMode::Cookie2),
            _ => None,
        }
    }
}

pub fn port_text(port: &PortSpec) -> String {
    match port {
        PortSpec::AnyPort => "any".into(),
        PortSpec::SamePortOnly => "same".into(),
        PortSpec::PortList { ports, .. } => ports.iter().map(u16::to_string).collect::<Vec<_>>().join(","),
    }
}

pub fn push_spec(out: &mut Dump, prefix: &str, spec: &CookieSpec) {
    out.push(format!("{prefix}.name"), &spec.name);
    out.push(format!("{prefix}.value"), &spec.value);
    out.push(format!("{prefix}.version"), spec.version);
    if let Some(d) = &spec.domain {
        out.push(format!("{prefix}.domain"), d);
    }
    if let Some(p) = &spec.path {
        out.push(format!("{prefix}.path"), p);
    }
    if let Some(e) = spec.expires {
        out.push(format!("{prefix}.expires"), e);
    }
    if let Some(m) = spec.max_age {
        out.push(format!("{prefix}.max_age"), m);
    }
    if spec.discard {
        out.push(format!("{prefix}.discard"), true);
    }
    if spec.secure {
        out.push(format!("{prefix}.secure"), true);
    }
    if let Some(c) = &spec.comment {
        out.push(format!("{prefix}.comment"), c);
    }
    if let Some(c) = &spec.comment_url {
        out.push(format!("{prefix}.comment_url"), c);
    }
    if !spec.port.is_any() {
        out.push(format!("{prefix}.port"), port_text(&spec.port));
    }
    for extra in &spec.extras {
        out.push(format!("{prefix}.extra.{}", extra.name), extra.value.as_deref().unwrap_or(""));
    }
}

/// Parses one header value and renders the result.
pub fn parse_dump(mode: ParseMode, text: &str) -> Result<Dump, ParseError> {
    let mut out = Dump::default();
    match mode {
        ParseMode::V0 | ParseMode::V1 => {
            let m = if mode == ParseMode::V0 { Mode::V0 } else { Mode::V1 };
            let specs = parse_set_cookie(text, m)?;
            out.push("cookies", specs.len());
            for (i, spec) in specs.iter().enumerate() {
                push_spec(&mut out, &format!("cookie.{i}"), spec);
            }
        }
        ParseMode::Cookie => {
            let parsed = parse_cookie_request(&[text])?;
            out.push("version", parsed.version);
            out.push("entries", parsed.entries.len());
            for (i, e) in parsed.entries.iter().enumerate() {
                out.push(format!("entry.{i}.name"), &e.name);
                out.push(format!("entry.{i}.value"), &e.value);
                if let Some(p) = &e.path {
                    out.push(format!("entry.{i}.path"), p);
                }
                if let Some(d) = &e.domain {
                    out.push(format!("entry.{i}.domain"), d);
                }
                if let Some(p) = &e.port {
                    out.push(format!("entry.{i}.port"), port_text(p));
                }
            }
        }
        ParseMode::Cookie2 => out.push("version", parse_cookie2(text)?),
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchInputError {
    Host(String),
    Domain(String),
}

impl fmt::Display for MatchInputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchInputError::Host(m) => write!(f, "malformed host: {m}"),
            MatchInputError::Domain(m) => write!(f, "malformed domain: {m}"),
        }
    }
}

pub fn match_verdict(v1: bool, host: &str, domain: &str) -> Result<DomainVerdict, MatchInputError> {
    let host = HostName::parse(host).map_err(|e| MatchInputError::Host(e.to_string()))?;
    let domain = DomainPattern::parse(domain).map_err(|e| MatchInputError::Domain(e.to_string()))?;
    Ok(if v1 {
        validate_domain_v1(&host, &domain)
    } else {
        validate_domain_v0(&host, &domain)
    })
}

pub fn emulate_dump(flavor: ClientFlavor, kind: SetCookieKind, text: &str) -> Dump {
    let mut out = Dump::default();
    match emulate_client(flavor, kind, text) {
        Emulated::Stored { name, value } => {
            out.push("stored.name", name);
            out.push("stored.value", value);
        }
        Emulated::Ignored { diagnostic } => {
            out.push("ignored", true);
            out.push("diagnostic", diagnostic);
        }
    }
    out
}
