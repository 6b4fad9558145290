//! Exchange scripts: a line-oriented description of clients, servers,
//! proxies and the requests made between them.
//!
//! ```text
//! # comment
//! client alice rfc2965            # flavor: rfc2965 | navigator3 | msie3
//! server www.shop.com v1          # v1 servers negotiate; v0 servers never send Set-Cookie2
//! proxy cache1
//! serve www.ads.com /banner.gif   # canned response for derived requests
//! header Set-Cookie: ad=1
//! request alice http://www.news.com/ via=cache1
//! header Cookie2: $Version=1      # extra request header
//! response                        # or `response uncacheable`
//! header Set-Cookie: id=1; path=/
//! link inline http://www.ads.com/banner.gif
//! request alice http://www.ads.com/x from=0 trigger=redirect
//! advance 3600
//! end-session alice
//! ```
//!
//! `header` and `link` lines attach to the closest preceding `request`,
//! `response` or `serve` line. Steps (`request`, `response`, `advance`,
//! `end-session`) are numbered from 0 in file order.

use std::fmt::Write as _;

use thiserror::Error;

use super::emulate::ClientFlavor;
use super::negotiate::ServerCapability;
use super::Header;
use crate::policy::{RequestContext, Trigger};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientDecl {
    pub id: String,
    pub flavor: ClientFlavor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Link {
    pub trigger: Trigger,
    pub url: String,
}

/// A canned server response used for requests without an explicit
/// `response` step. The longest matching path prefix wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub host: String,
    pub path: String,
    pub headers: Vec<Header>,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestStep {
    pub client: String,
    pub url: String,
    pub proxy: Option<String>,
    /// Origin request step and trigger for an unverifiable request.
    pub derived: Option<(usize, Trigger)>,
    pub headers: Vec<Header>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseStep {
    pub headers: Vec<Header>,
    pub links: Vec<Link>,
    pub cacheable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Request(RequestStep),
    Response(ResponseStep),
    Advance(i64),
    EndSession(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExchangeScript {
    pub clients: Vec<ClientDecl>,
    pub servers: Vec<(String, ServerCapability)>,
    pub proxies: Vec<String>,
    pub routes: Vec<Route>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default(), step.map(|s| format!("step {s}: ")).unwrap_or_default())]
pub struct ScriptError {
    pub line: Option<usize>,
    pub step: Option<usize>,
    pub message: String,
}

enum Target {
    Nothing,
    Step(usize),
    Route(usize),
}

impl ExchangeScript {
    pub fn parse(text: &str) -> Result<ExchangeScript, ScriptError> {
        let mut script = ExchangeScript::default();
        let mut target = Target::Nothing;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let step_no = script.steps.len();
            let err = |step: Option<usize>, message: String| ScriptError {
                line: Some(line_no),
                step,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();

            match keyword {
                "header" => {
                    let (name, value) = rest
                        .split_once(':')
                        .ok_or_else(|| err(None, format!("header line needs 'Name: value': {rest:?}")))?;
                    let header = Header::new(name.trim(), value.trim());
                    match target {
                        Target::Step(i) => match &mut script.steps[i] {
                            Step::Request(r) => r.headers.push(header),
                            Step::Response(r) => r.headers.push(header),
                            _ => unreachable!("only requests and responses are targets"),
                        },
                        Target::Route(i) => script.routes[i].headers.push(header),
                        Target::Nothing => return Err(err(None, "header outside a request, response or serve block".into())),
                    }
                }
                "link" => {
                    let words: Vec<&str> = rest.split_whitespace().collect();
                    let [trigger, url] = words[..] else {
                        return Err(err(None, "link needs '<trigger> <url>'".into()));
                    };
                    let trigger = Trigger::parse(trigger)
                        .ok_or_else(|| err(None, format!("unknown trigger {trigger:?}")))?;
                    let link = Link {
                        trigger,
                        url: url.to_string(),
                    };
                    match target {
                        Target::Step(i) => match &mut script.steps[i] {
                            Step::Response(r) => r.links.push(link),
                            _ => return Err(err(Some(i), "links belong to responses".into())),
                        },
                        Target::Route(i) => script.routes[i].links.push(link),
                        Target::Nothing => return Err(err(None, "link outside a response or serve block".into())),
                    }
                }
                "client" => {
                    let words: Vec<&str> = rest.split_whitespace().collect();
                    let (id, flavor) = match words[..] {
                        [id] => (id, ClientFlavor::Rfc2965),
                        [id, flavor] => (
                            id,
                            ClientFlavor::parse(flavor).ok_or_else(|| err(None, format!("unknown flavor {flavor:?}")))?,
                        ),
                        _ => return Err(err(None, "client needs '<id> [flavor]'".into())),
                    };
                    script.clients.push(ClientDecl {
                        id: id.to_string(),
                        flavor,
                    });
                    target = Target::Nothing;
                }
                "server" => {
                    let words: Vec<&str> = rest.split_whitespace().collect();
                    let [host, cap] = words[..] else {
                        return Err(err(None, "server needs '<host> v0|v1'".into()));
                    };
                    let cap = match cap {
                        "v0" => ServerCapability::V0Only,
                        "v1" => ServerCapability::V1Capable,
                        other => return Err(err(None, format!("unknown server capability {other:?}"))),
                    };
                    script.servers.push((host.to_ascii_lowercase(), cap));
                    target = Target::Nothing;
                }
                "proxy" => {
                    if rest.is_empty() || rest.contains(char::is_whitespace) {
                        return Err(err(None, "proxy needs '<id>'".into()));
                    }
                    script.proxies.push(rest.to_string());
                    target = Target::Nothing;
                }
                "serve" => {
                    let words: Vec<&str> = rest.split_whitespace().collect();
                    let [host, path] = words[..] else {
                        return Err(err(None, "serve needs '<host> <path>'".into()));
                    };
                    script.routes.push(Route {
                        host: host.to_ascii_lowercase(),
                        path: path.to_string(),
                        headers: Vec::new(),
                        links: Vec::new(),
                    });
                    target = Target::Route(script.routes.len() - 1);
                }
                "request" => {
                    let mut words = rest.split_whitespace();
                    let (Some(client), Some(url)) = (words.next(), words.next()) else {
                        return Err(err(Some(step_no), "request needs '<client> <url>'".into()));
                    };
                    let mut step = RequestStep {
                        client: client.to_string(),
                        url: url.to_string(),
                        proxy: None,
                        derived: None,
                        headers: Vec::new(),
                    };
                    let mut from = None;
                    let mut trigger = None;
                    for option in words {
                        match option.split_once('=') {
                            Some(("via", p)) => step.proxy = Some(p.to_string()),
                            Some(("from", n)) => {
                                from = Some(n.parse::<usize>().map_err(|_| err(Some(step_no), format!("bad step index {n:?}")))?)
                            }
                            Some(("trigger", t)) => {
                                trigger = Some(Trigger::parse(t).ok_or_else(|| err(Some(step_no), format!("unknown trigger {t:?}")))?)
                            }
                            _ => return Err(err(Some(step_no), format!("unknown request option {option:?}"))),
                        }
                    }
                    step.derived = match (from, trigger) {
                        (None, None) => None,
                        (Some(f), Some(t)) => Some((f, t)),
                        _ => return Err(err(Some(step_no), "from= and trigger= go together".into())),
                    };
                    script.steps.push(Step::Request(step));
                    target = Target::Step(step_no);
                }
                "response" => {
                    let cacheable = match rest {
                        "" | "cacheable" => true,
                        "uncacheable" => false,
                        other => return Err(err(Some(step_no), format!("unknown response option {other:?}"))),
                    };
                    script.steps.push(Step::Response(ResponseStep {
                        headers: Vec::new(),
                        links: Vec::new(),
                        cacheable,
                    }));
                    target = Target::Step(step_no);
                }
                "advance" => {
                    let secs = rest
                        .parse()
                        .map_err(|_| err(Some(step_no), format!("bad seconds {rest:?}")))?;
                    script.steps.push(Step::Advance(secs));
                    target = Target::Nothing;
                }
                "end-session" => {
                    if rest.is_empty() {
                        return Err(err(Some(step_no), "end-session needs a client".into()));
                    }
                    script.steps.push(Step::EndSession(rest.to_string()));
                    target = Target::Nothing;
                }
                other => return Err(err(None, format!("unknown record {other:?}"))),
            }
        }
        script.validate()?;
        Ok(script)
    }

    /// Checks the structural rules: responses follow their request, derived
    /// requests point back at an earlier request, and every name resolves.
    pub fn validate(&self) -> Result<(), ScriptError> {
        let err = |step: Option<usize>, message: String| ScriptError {
            line: None,
            step,
            message,
        };
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.clients {
            if !seen.insert(c.id.as_str()) {
                return Err(err(None, format!("client {} declared twice", c.id)));
            }
        }
        let known_client = |id: &str| self.clients.iter().any(|c| c.id == id);
        let check_url = |step: Option<usize>, url: &str| {
            RequestContext::from_url(url)
                .map(|_| ())
                .map_err(|e| err(step, e.to_string()))
        };
        for route in &self.routes {
            for link in &route.links {
                check_url(None, &link.url)?;
            }
        }

        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Request(r) => {
                    if !known_client(&r.client) {
                        return Err(err(Some(i), format!("unknown client {:?}", r.client)));
                    }
                    if let Some(p) = &r.proxy {
                        if !self.proxies.contains(p) {
                            return Err(err(Some(i), format!("unknown proxy {p:?}")));
                        }
                    }
                    check_url(Some(i), &r.url)?;
                    if let Some((from, _)) = r.derived {
                        match self.steps.get(from) {
                            Some(Step::Request(origin)) if from < i => {
                                if origin.client != r.client {
                                    return Err(err(Some(i), format!("step {from} belongs to another client")));
                                }
                            }
                            _ => return Err(err(Some(i), format!("from={from} is not an earlier request"))),
                        }
                    }
                }
                Step::Response(resp) => {
                    if i == 0 || !matches!(self.steps[i - 1], Step::Request(_)) {
                        return Err(err(Some(i), "response without a preceding request".into()));
                    }
                    for link in &resp.links {
                        check_url(Some(i), &link.url)?;
                    }
                }
                Step::Advance(_) => {}
                Step::EndSession(client) => {
                    if !known_client(client) {
                        return Err(err(Some(i), format!("unknown client {client:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn server_capability(&self, host: &str) -> Option<ServerCapability> {
        self.servers.iter().find(|(h, _)| h == host).map(|(_, c)| *c)
    }

    pub fn route(&self, host: &str, path: &str) -> Option<&Route> {
        self.routes
            .iter()
            .filter(|r| r.host == host && path.starts_with(&r.path))
            .max_by_key(|r| r.path.len())
    }

    /// Writes the script in the text format accepted by [`ExchangeScript::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.clients {
            let _ = writeln!(out, "client {} {}", c.id, c.flavor);
        }
        for (host, cap) in &self.servers {
            let cap = match cap {
                ServerCapability::V0Only => "v0",
                ServerCapability::V1Capable => "v1",
            };
            let _ = writeln!(out, "server {host} {cap}");
        }
        for p in &self.proxies {
            let _ = writeln!(out, "proxy {p}");
        }
        for r in &self.routes {
            let _ = writeln!(out, "serve {} {}", r.host, r.path);
            write_headers(&mut out, &r.headers);
            write_links(&mut out, &r.links);
        }
        for step in &self.steps {
            match step {
                Step::Request(r) => {
                    let _ = write!(out, "request {} {}", r.client, r.url);
                    if let Some(p) = &r.proxy {
                        let _ = write!(out, " via={p}");
                    }
                    if let Some((from, trigger)) = r.derived {
                        let _ = write!(out, " from={from} trigger={}", trigger.as_str());
                    }
                    out.push('\n');
                    write_headers(&mut out, &r.headers);
                }
                Step::Response(r) => {
                    out.push_str(if r.cacheable { "response\n" } else { "response uncacheable\n" });
                    write_headers(&mut out, &r.headers);
                    write_links(&mut out, &r.links);
                }
                Step::Advance(secs) => {
                    let _ = writeln!(out, "advance {secs}");
                }
                Step::EndSession(c) => {
                    let _ = writeln!(out, "end-session {c}");
                }
            }
        }
        out
    }
}

fn write_headers(out: &mut String, headers: &[Header]) {
    for h in headers {
        let _ = writeln!(out, "header {}: {}", h.name, h.value);
    }
}

fn write_links(out: &mut String, links: &[Link]) {
    for l in links {
        let _ = writeln!(out, "link {} {}", l.trigger.as_str(), l.url);
    }
}
