//! Parsing and serialization of `Set-Cookie`, `Set-Cookie2`, `Cookie` and
//! `Cookie2` header values.
//!
//! Attribute names are matched case-insensitively; cookie names and values
//! are case-sensitive and kept verbatim. A v1 cookie value written as a
//! quoted string keeps its quotes, since the value is opaque to the client.

use std::fmt;

use thiserror::Error;

use crate::date::{format_http_date, parse_http_date, UnixTime};
use crate::jar::StoredCookie;
use crate::matching::DomainPattern;

/// Which Set-Cookie grammar to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `Set-Cookie`, the original mechanism.
    V0,
    /// `Set-Cookie2`.
    V1,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing NAME=VALUE pair")]
    MissingNameValue,
    #[error("cookie name {0:?} is reserved ($-prefixed)")]
    ReservedName(String),
    #[error("invalid cookie name {0:?}")]
    InvalidName(String),
    #[error("invalid cookie value {0:?}")]
    InvalidValue(String),
    #[error("malformed quoted string")]
    MalformedQuotedString,
    #[error("unparseable date {0:?}")]
    InvalidDate(String),
    #[error("invalid Max-Age {0:?}")]
    InvalidMaxAge(String),
    #[error("invalid Port {0:?}")]
    InvalidPort(String),
    #[error("invalid Version {0:?}")]
    InvalidVersion(String),
    #[error("invalid Domain {0:?}")]
    InvalidDomain(String),
    #[error("attribute {0} requires a value")]
    MissingAttributeValue(String),
    #[error("attribute {0} repeated with a different value")]
    ConflictingAttribute(String),
    #[error("{0} does not follow a cookie")]
    DanglingAttribute(String),
    #[error("unknown reserved attribute {0}")]
    UnknownReservedAttribute(String),
    #[error("bare token {0:?} without '='")]
    BareToken(String),
    #[error("$Version changes within one request")]
    InconsistentVersion,
}

impl ParseError {
    /// The stable class name used in diagnostics and corpus files.
    pub fn class(&self) -> &'static str {
        match self {
            ParseError::MissingNameValue => "MissingNameValue",
            ParseError::ReservedName(_) => "ReservedName",
            ParseError::InvalidName(_) => "InvalidName",
            ParseError::InvalidValue(_) => "InvalidValue",
            ParseError::MalformedQuotedString => "MalformedQuotedString",
            ParseError::InvalidDate(_) => "InvalidDate",
            ParseError::InvalidMaxAge(_) => "InvalidMaxAge",
            ParseError::InvalidPort(_) => "InvalidPort",
            ParseError::InvalidVersion(_) => "InvalidVersion",
            ParseError::InvalidDomain(_) => "InvalidDomain",
            ParseError::MissingAttributeValue(_) => "MissingAttributeValue",
            ParseError::ConflictingAttribute(_) => "ConflictingAttribute",
            ParseError::DanglingAttribute(_) => "DanglingAttribute",
            ParseError::UnknownReservedAttribute(_) => "UnknownReservedAttribute",
            ParseError::BareToken(_) => "BareToken",
            ParseError::InconsistentVersion => "InconsistentVersion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("invalid cookie name {0:?}")]
    InvalidName(String),
    #[error("value {0:?} is not allowed in a version 0 cookie")]
    InvalidValue(String),
    #[error("attribute {0} cannot be written in a version 0 header")]
    InvalidAttribute(String),
    #[error("version {0} is not supported")]
    InvalidVersion(u8),
}

/// The Port attribute of a v1 cookie.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum PortSpec {
    /// No Port attribute: any port on the host.
    #[default]
    AnyPort,
    /// `Port` without a value: only the port the cookie came from.
    SamePortOnly,
    /// `Port="80,443"`; `ports` is sorted and deduplicated, `raw` is the
    /// received text, echoed back in `$Port`.
    PortList { ports: Vec<u16>, raw: String },
}

impl PortSpec {
    pub fn list(ports: Vec<u16>) -> Result<PortSpec, ParseError> {
        let raw = ports
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        PortSpec::parse_list(&raw)
    }

    /// Parses a comma-separated port list (quotes already removed).
    pub fn parse_list(raw: &str) -> Result<PortSpec, ParseError> {
        let mut ports = Vec::new();
        for item in raw.split(',') {
            let port: u16 = item
                .trim()
                .parse()
                .map_err(|_| ParseError::InvalidPort(raw.to_string()))?;
            if port == 0 {
                return Err(ParseError::InvalidPort(raw.to_string()));
            }
            ports.push(port);
        }
        ports.sort_unstable();
        ports.dedup();
        Ok(PortSpec::PortList {
            ports,
            raw: raw.to_string(),
        })
    }

    pub fn is_any(&self) -> bool {
        matches!(self, PortSpec::AnyPort)
    }
}

/// An attribute the parser did not recognize, kept as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: String,
    pub value: Option<String>,
}

/// One cookie declared by a Set-Cookie or Set-Cookie2 header.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CookieSpec {
    pub name: String,
    pub value: String,
    pub domain: Option<DomainPattern>,
    pub path: Option<String>,
    pub expires: Option<UnixTime>,
    pub max_age: Option<u64>,
    pub discard: bool,
    pub secure: bool,
    pub comment: Option<String>,
    pub comment_url: Option<String>,
    pub port: PortSpec,
    pub version: u8,
    pub extras: Vec<Attribute>,
}

impl CookieSpec {
    pub fn new(name: impl Into<String>, value: impl Into<String>, version: u8) -> CookieSpec {
        CookieSpec {
            name: name.into(),
            value: value.into(),
            domain: None,
            path: None,
            expires: None,
            max_age: None,
            discard: false,
            secure: false,
            comment: None,
            comment_url: None,
            port: PortSpec::AnyPort,
            version,
            extras: Vec::new(),
        }
    }
}

/// One cookie in a `Cookie` request header, with the `$`-attributes that
/// followed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestCookie {
    pub name: String,
    pub value: String,
    pub path: Option<String>,
    pub domain: Option<String>,
    pub port: Option<PortSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CookieRequestParse {
    pub version: u32,
    pub entries: Vec<RequestCookie>,
}

// ---------------------------------------------------------------------------
// scanning

#[derive(Debug, Clone, PartialEq, Eq)]
struct RawPair {
    name: String,
    value: Option<String>,
}

#[derive(Clone, Copy)]
struct ScanRules {
    quotes: bool,
    expires_dates: bool,
}

struct Scanner<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn peek(&self) -> Option<char> {
        self.input[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn take_until(&mut self, stop: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !stop(c)) {
            self.bump();
        }
        &self.input[start..self.pos]
    }

    /// Reads a quoted string, returning it with its quotes.
    fn quoted(&mut self) -> Result<&'a str, ParseError> {
        let start = self.pos;
        self.bump();
        loop {
            match self.bump() {
                None => return Err(ParseError::MalformedQuotedString),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(ParseError::MalformedQuotedString);
                    }
                }
                Some('"') => return Ok(&self.input[start..self.pos]),
                Some(_) => {}
            }
        }
    }

    /// Reads an Expires date up to the next `;`. A comma only ends the date
    /// when it does not follow the leading weekday name.
    fn expires_value(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == ';' {
                break;
            }
            if c == ',' {
                let so_far = &self.input[start..self.pos];
                if so_far.is_empty() || !so_far.chars().all(|c| c.is_ascii_alphabetic()) {
                    break;
                }
            }
            self.bump();
        }
        self.input[start..self.pos].trim_end()
    }
}

/// Splits header text into comma-separated groups of `;`-separated pairs.
fn scan(input: &str, rules: ScanRules) -> Result<Vec<Vec<RawPair>>, ParseError> {
    let mut s = Scanner { input, pos: 0 };
    let mut groups: Vec<Vec<RawPair>> = vec![Vec::new()];
    loop {
        s.skip_ws();
        match s.peek() {
            None => break,
            Some(';') => {
                s.bump();
                continue;
            }
            Some(',') => {
                s.bump();
                if !groups.last().is_some_and(Vec::is_empty) {
                    groups.push(Vec::new());
                }
                continue;
            }
            Some(_) => {}
        }

        let name = s.take_until(|c| matches!(c, '=' | ';' | ',')).trim().to_string();
        let value = if s.peek() == Some('=') {
            s.bump();
            s.skip_ws();
            let is_expires = rules.expires_dates && name.eq_ignore_ascii_case("expires");
            if rules.quotes && s.peek() == Some('"') {
                let v = s.quoted()?;
                s.skip_ws();
                if !matches!(s.peek(), None | Some(';') | Some(',')) {
                    return Err(ParseError::MalformedQuotedString);
                }
                Some(v.to_string())
            } else if is_expires {
                Some(s.expires_value().to_string())
            } else {
                Some(s.take_until(|c| c == ';' || c == ',').trim_end().to_string())
            }
        } else {
            None
        };
        groups
            .last_mut()
            .expect("at least one group")
            .push(RawPair { name, value });
    }
    groups.retain(|g| !g.is_empty());
    Ok(groups)
}

fn is_quoted(text: &str) -> bool {
    text.len() >= 2 && text.starts_with('"') && text.ends_with('"')
}

/// Strips quotes and backslash escapes from a quoted string; other text is
/// returned unchanged.
pub fn unquote(text: &str) -> String {
    if !is_quoted(text) {
        return text.to_string();
    }
    let inner = &text[1..text.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// HTTP separator characters; attribute values containing any of these are
/// quoted in v1 output.
fn is_separator(c: char) -> bool {
    matches!(
        c,
        '(' | ')' | '<' | '>' | '@' | ',' | ';' | ':' | '\\' | '"' | '/' | '[' | ']' | '?' | '='
            | '{' | '}'
    ) || c.is_whitespace()
        || c.is_control()
}

fn quote_if_needed(text: &str) -> String {
    if text.is_empty() || text.chars().any(is_separator) {
        quote(text)
    } else {
        text.to_string()
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, ';' | ',' | '=' | '"'))
}

fn valid_v0_value(value: &str) -> bool {
    !value.chars().any(|c| c.is_whitespace() || c == ';' || c == ',')
}

/// A v1 value is either a complete quoted string or free of whitespace,
/// `;`, `,` and `"`.
fn valid_v1_value(value: &str) -> bool {
    if value.starts_with('"') {
        let mut s = Scanner { input: value, pos: 0 };
        return s.quoted().is_ok_and(|q| q.len() == value.len());
    }
    !value
        .chars()
        .any(|c| c.is_whitespace() || c.is_control() || matches!(c, ';' | ',' | '"'))
}

// ---------------------------------------------------------------------------
// Set-Cookie / Set-Cookie2

const V0_ATTRIBUTES: [&str; 4] = ["domain", "expires", "path", "secure"];
const V1_ATTRIBUTES: [&str; 10] = [
    "comment",
    "commenturl",
    "discard",
    "domain",
    "expires",
    "max-age",
    "path",
    "port",
    "secure",
    "version",
];

fn known_attribute(mode: Mode, lname: &str) -> bool {
    match mode {
        Mode::V0 => V0_ATTRIBUTES.contains(&lname),
        Mode::V1 => V1_ATTRIBUTES.contains(&lname),
    }
}

/// Parses the value of a `Set-Cookie` (V0) or `Set-Cookie2` (V1) header.
pub fn parse_set_cookie(header_value: &str, mode: Mode) -> Result<Vec<CookieSpec>, ParseError> {
    let rules = ScanRules {
        quotes: mode == Mode::V1,
        expires_dates: true,
    };
    let groups = scan(header_value, rules)?;
    if groups.is_empty() {
        return Err(ParseError::MissingNameValue);
    }
    groups.into_iter().map(|g| build_spec(g, mode)).collect()
}

fn build_spec(pairs: Vec<RawPair>, mode: Mode) -> Result<CookieSpec, ParseError> {
    let mut pairs = pairs.into_iter();
    let first = pairs.next().ok_or(ParseError::MissingNameValue)?;
    let value = match first.value {
        Some(v) if !first.name.is_empty() => v,
        _ => return Err(ParseError::MissingNameValue),
    };
    if first.name.starts_with('$') {
        return Err(ParseError::ReservedName(first.name));
    }
    if !valid_name(&first.name) {
        return Err(ParseError::InvalidName(first.name));
    }
    let value_ok = match mode {
        Mode::V0 => valid_v0_value(&value),
        Mode::V1 => valid_v1_value(&value),
    };
    if !value_ok {
        return Err(ParseError::InvalidValue(value));
    }

    let mut spec = CookieSpec::new(first.name, value, match mode {
        Mode::V0 => 0,
        Mode::V1 => 1,
    });
    // (attribute, value as seen) for duplicate detection in V1
    let mut seen: Vec<(String, Option<String>)> = Vec::new();

    for pair in pairs {
        let lname = pair.name.to_ascii_lowercase();
        if !known_attribute(mode, &lname) {
            spec.extras.push(Attribute {
                name: pair.name,
                value: pair.value,
            });
            continue;
        }
        let value = match mode {
            Mode::V1 => pair.value.as_deref().map(unquote),
            Mode::V0 => pair.value.clone(),
        };
        if mode == Mode::V1 {
            if let Some((_, prev)) = seen.iter().find(|(n, _)| *n == lname) {
                if *prev != value {
                    return Err(ParseError::ConflictingAttribute(pair.name));
                }
                continue;
            }
            seen.push((lname.clone(), value.clone()));
        }
        apply_attribute(&mut spec, &lname, &pair.name, value)?;
    }
    Ok(spec)
}

fn apply_attribute(
    spec: &mut CookieSpec,
    lname: &str,
    name: &str,
    value: Option<String>,
) -> Result<(), ParseError> {
    let required = |v: Option<String>| v.ok_or_else(|| ParseError::MissingAttributeValue(name.to_string()));
    match lname {
        "domain" => {
            let v = required(value)?;
            let pattern = DomainPattern::parse(&v).map_err(|_| ParseError::InvalidDomain(v.clone()))?;
            spec.domain = Some(pattern);
        }
        "path" => spec.path = Some(required(value)?),
        "expires" => {
            let v = required(value)?;
            spec.expires = Some(parse_http_date(&v).map_err(|_| ParseError::InvalidDate(v.clone()))?);
        }
        "secure" => spec.secure = true,
        "discard" => spec.discard = true,
        "max-age" => {
            let v = required(value)?;
            spec.max_age = Some(v.trim().parse().map_err(|_| ParseError::InvalidMaxAge(v.clone()))?);
        }
        "version" => {
            let v = required(value)?;
            if v.trim() != "1" {
                return Err(ParseError::InvalidVersion(v));
            }
            spec.version = 1;
        }
        "port" => {
            spec.port = match value {
                None => PortSpec::SamePortOnly,
                Some(v) => PortSpec::parse_list(&v)?,
            }
        }
        "comment" => spec.comment = Some(required(value)?),
        "commenturl" => spec.comment_url = Some(required(value)?),
        _ => unreachable!("attribute {lname} is not known"),
    }
    Ok(())
}

/// Writes a spec back as a header value: NAME=VALUE, then the recognized
/// attributes in alphabetical order, then unrecognized attributes in the
/// order they were received.
pub fn serialize_set_cookie(spec: &CookieSpec) -> Result<String, SerializeError> {
    if spec.name.starts_with('$') || !valid_name(&spec.name) {
        return Err(SerializeError::InvalidName(spec.name.clone()));
    }
    let mut out = String::new();
    match spec.version {
        0 => {
            if !valid_v0_value(&spec.value) {
                return Err(SerializeError::InvalidValue(spec.value.clone()));
            }
            if spec.max_age.is_some() {
                return Err(SerializeError::InvalidAttribute("Max-Age".into()));
            }
            if spec.discard {
                return Err(SerializeError::InvalidAttribute("Discard".into()));
            }
            if spec.comment.is_some() {
                return Err(SerializeError::InvalidAttribute("Comment".into()));
            }
            if spec.comment_url.is_some() {
                return Err(SerializeError::InvalidAttribute("CommentURL".into()));
            }
            if !spec.port.is_any() {
                return Err(SerializeError::InvalidAttribute("Port".into()));
            }
            out.push_str(&spec.name);
            out.push('=');
            out.push_str(&spec.value);
            if let Some(domain) = &spec.domain {
                out.push_str("; Domain=");
                out.push_str(&domain.to_string());
            }
            if let Some(expires) = spec.expires {
                out.push_str("; Expires=");
                out.push_str(&format_http_date(expires));
            }
            if let Some(path) = &spec.path {
                if !valid_v0_value(path) {
                    return Err(SerializeError::InvalidAttribute("Path".into()));
                }
                out.push_str("; Path=");
                out.push_str(path);
            }
            if spec.secure {
                out.push_str("; Secure");
            }
        }
        1 => {
            out.push_str(&spec.name);
            out.push('=');
            if valid_v1_value(&spec.value) {
                out.push_str(&spec.value);
            } else {
                out.push_str(&quote(&spec.value));
            }
            if let Some(comment) = &spec.comment {
                out.push_str("; Comment=");
                out.push_str(&quote_if_needed(comment));
            }
            if let Some(url) = &spec.comment_url {
                out.push_str("; CommentURL=");
                out.push_str(&quote_if_needed(url));
            }
            if spec.discard {
                out.push_str("; Discard");
            }
            if let Some(domain) = &spec.domain {
                out.push_str("; Domain=");
                out.push_str(&quote_if_needed(&domain.to_string()));
            }
            if let Some(expires) = spec.expires {
                out.push_str("; Expires=");
                out.push_str(&format_http_date(expires));
            }
            if let Some(max_age) = spec.max_age {
                out.push_str(&format!("; Max-Age={max_age}"));
            }
            if let Some(path) = &spec.path {
                out.push_str("; Path=");
                out.push_str(&quote_if_needed(path));
            }
            match &spec.port {
                PortSpec::AnyPort => {}
                PortSpec::SamePortOnly => out.push_str("; Port"),
                PortSpec::PortList { raw, .. } => {
                    out.push_str("; Port=");
                    out.push_str(&quote(raw));
                }
            }
            if spec.secure {
                out.push_str("; Secure");
            }
            out.push_str("; Version=1");
        }
        v => return Err(SerializeError::InvalidVersion(v)),
    }
    for extra in &spec.extras {
        out.push_str("; ");
        out.push_str(&extra.name);
        if let Some(value) = &extra.value {
            out.push('=');
            out.push_str(value);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cookie / Cookie2

/// Parses every `Cookie` header of one request. Multiple headers behave as
/// if folded into one, comma-separated.
pub fn parse_cookie_request<S: AsRef<str>>(header_values: &[S]) -> Result<CookieRequestParse, ParseError> {
    let joined = header_values
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(", ");
    let rules = ScanRules {
        quotes: true,
        expires_dates: false,
    };
    let pairs = scan(&joined, rules)?.into_iter().flatten();

    let mut version: Option<u32> = None;
    let mut entries: Vec<RequestCookie> = Vec::new();
    for pair in pairs {
        if let Some(attr) = pair.name.strip_prefix('$') {
            match attr.to_ascii_lowercase().as_str() {
                "version" => {
                    let raw = pair
                        .value
                        .ok_or_else(|| ParseError::MissingAttributeValue(pair.name.clone()))?;
                    let v: u32 = unquote(&raw)
                        .trim()
                        .parse()
                        .map_err(|_| ParseError::InvalidVersion(raw.clone()))?;
                    match version {
                        None if entries.is_empty() => version = Some(v),
                        Some(current) if current == v => {}
                        _ => return Err(ParseError::InconsistentVersion),
                    }
                }
                "path" | "domain" => {
                    let entry = entries
                        .last_mut()
                        .ok_or_else(|| ParseError::DanglingAttribute(pair.name.clone()))?;
                    let value = pair
                        .value
                        .as_deref()
                        .map(unquote)
                        .ok_or_else(|| ParseError::MissingAttributeValue(pair.name.clone()))?;
                    if attr.eq_ignore_ascii_case("path") {
                        entry.path = Some(value);
                    } else {
                        entry.domain = Some(value);
                    }
                }
                "port" => {
                    let entry = entries
                        .last_mut()
                        .ok_or_else(|| ParseError::DanglingAttribute(pair.name.clone()))?;
                    entry.port = Some(match pair.value.as_deref() {
                        None => PortSpec::SamePortOnly,
                        Some(raw) => PortSpec::parse_list(&unquote(raw))?,
                    });
                }
                _ => return Err(ParseError::UnknownReservedAttribute(pair.name)),
            }
            continue;
        }
        let value = pair.value.ok_or_else(|| ParseError::BareToken(pair.name.clone()))?;
        if !valid_name(&pair.name) {
            return Err(ParseError::InvalidName(pair.name));
        }
        entries.push(RequestCookie {
            name: pair.name,
            value,
            path: None,
            domain: None,
            port: None,
        });
    }
    Ok(CookieRequestParse {
        version: version.unwrap_or(0),
        entries,
    })
}

/// Parses a `Cookie2` header value such as `$Version=1`.
pub fn parse_cookie2(header_value: &str) -> Result<u32, ParseError> {
    let parsed = parse_cookie_request(&[header_value])?;
    if !parsed.entries.is_empty() || !header_value.contains('$') {
        return Err(ParseError::InvalidVersion(header_value.to_string()));
    }
    Ok(parsed.version)
}

/// Builds a `Cookie` header value from cookies already in send order.
///
/// Version 0 emits bare `name=value` pairs. Version 1 leads with
/// `$Version=1` and follows each cookie with `$Path`, plus `$Domain` and
/// `$Port` when those attributes were present on the Set-Cookie2.
pub fn serialize_cookie_header(selected: &[StoredCookie], version: u32) -> String {
    let mut parts: Vec<String> = Vec::new();
    if version >= 1 && !selected.is_empty() {
        parts.push(format!("$Version={version}"));
    }
    for cookie in selected {
        parts.push(format!("{}={}", cookie.spec.name, cookie.spec.value));
        if version == 0 {
            continue;
        }
        parts.push(format!("$Path={}", quote_if_needed(&cookie.effective_path)));
        if let Some(domain) = &cookie.spec.domain {
            parts.push(format!("$Domain={}", quote_if_needed(&domain.to_string())));
        }
        match &cookie.spec.port {
            PortSpec::AnyPort => {}
            PortSpec::SamePortOnly => parts.push("$Port".to_string()),
            PortSpec::PortList { raw, .. } => parts.push(format!("$Port={}", quote(raw))),
        }
    }
    parts.join("; ")
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::V0 => "v0",
            Mode::V1 => "v1",
        })
    }
}
